"""恒等式校验模块

按套件（core / trig / sturm / bessel / weber）运行数值恒等式检查，
每项检查记录恒等式编号、公式原文、最大残差、容差与是否通过。
库函数抛出的 QCalcError 记为失败的检查，不会中断整个套件。
"""

import time
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from mpmath import mp, mpf

from src.core.errors import QCalcError, QDomainError
from src.core.qcore import (
    GUARD_DIGITS, GridFunction, Precision, QGrid, QParam, QPoint, cumulative_jackson,
    jackson_0_to_a, jackson_0_to_inf, jackson_a_to_inf, json_real, q_derivative, q_gamma,
    q_pochhammer, structural_q, make_q_param,
)
from src.core.qspecial import (
    grid_eval_bessel, grid_eval_trig, hahn_exton_J, j_alpha, q_cos, q_exp_E, q_exp_e, q_sin,
)
from src.core.qsturm import (
    BoundaryParams, Coupling, Potential, Problem, bracket_profile, certify_solution, coeffs_fitted,
    coeffs_integral, compact_potential, green_formula_residual, homogeneous_solution,
    main_identity_report, picard_solve, q_wronskian, solve, zero_potential,
)
from src.core.qbessel import (
    bessel_basis_wronskian, bessel_grid_values, bessel_ode_residual, bessel_remainder,
    delta_q_alpha, heat_kernel, heat_moment, principal_on_lattice, ramanujan_B_alpha,
    ramanujan_direct_sum, weber_A_alpha, weber_integral,
)

logger = logging.getLogger('verifier')

SUITES = ("core", "trig", "sturm", "bessel", "weber")
DEFAULT_SEED = 20240601
# 条件数达到该值的点由级数在 extended 精度下单独检查
ILL_CONDITIONED = 1e10


@dataclass(frozen=True)
class VerifyCheck:
    """单项检查结果"""
    identity: str
    anchor: str
    max_residual: Optional[mpf]
    tolerance: float
    passed: bool
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "identity": self.identity,
            "anchor": self.anchor,
            "max_residual": json_real(self.max_residual),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class VerifyReport:
    """套件报告；通过当且仅当每项检查都通过"""
    suite: str
    checks: List[VerifyCheck] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed_checks(self) -> List[VerifyCheck]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self, include_wall_clock: bool = False) -> Dict[str, Any]:
        data = {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
        }
        if include_wall_clock:
            data["wall_clock"] = round(self.wall_clock, 3)
        return data

    @classmethod
    def combine(cls, suite: str, reports: List['VerifyReport']) -> 'VerifyReport':
        combined = cls(suite)
        for report in reports:
            combined.checks.extend(report.checks)
            combined.wall_clock += report.wall_clock
        return combined


def _rel(a: mpf, b: mpf) -> mpf:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale != 0 else mpf(0)


def _random_function(grid: QGrid, rng: np.random.Generator) -> GridFunction:
    return GridFunction(grid, [mpf(float(v)) for v in rng.uniform(-1, 1, len(grid))])


def _compact_function(grid: QGrid, rng: np.random.Generator) -> GridFunction:
    """两端各两个网格点取零的随机网格函数"""
    values = [mpf(float(v)) for v in rng.uniform(-1, 1, len(grid))]
    for i in (0, 1, -2, -1):
        values[i] = mpf(0)
    return GridFunction(grid, values)


class Verifier:
    """在给定底数与网格窗口上运行校验套件

    Args:
        qp: 底数参数
        k_min, k_max: 逐点检查使用的网格窗口
        seed: 随机网格函数的种子

    extended 精度下逐点检查在更高的工作精度上运行，容差随之收紧。
    """

    def __init__(self, qp: QParam, k_min: int = -12, k_max: int = 20, seed: int = DEFAULT_SEED):
        if k_max - k_min < 4:
            raise QDomainError("校验窗口至少需要 5 个网格点", {"k_min": k_min, "k_max": k_max})
        self.qp = qp
        self.grid = QGrid(qp, k_min, k_max)
        self.seed = seed
        self.dps = max(30, qp.precision.target_digits + GUARD_DIGITS)
        self._suites: Dict[str, Callable[[], List[VerifyCheck]]] = {
            "core": self._suite_core,
            "trig": self._suite_trig,
            "sturm": self._suite_sturm,
            "bessel": self._suite_bessel,
            "weber": self._suite_weber,
        }

    def run(self, suite: str) -> VerifyReport:
        """运行一个套件；'all' 依次运行全部套件

        Raises:
            QDomainError: 未知套件
        """
        if suite == "all":
            return VerifyReport.combine("all", [self.run(name) for name in SUITES])
        if suite not in self._suites:
            raise QDomainError(f"未知的校验套件: {suite}", {"expected": ", ".join(SUITES + ('all',))})
        start = time.time()
        checks = self._suites[suite]()
        report = VerifyReport(suite, checks, time.time() - start)
        status = "通过" if report.passed else f"失败 {len(report.failed_checks())} 项"
        logger.info(f"套件 {suite}: {len(checks)} 项检查，{status}，用时 {report.wall_clock:.2f}s")
        return report

    def _check(self, identity: str, anchor: str, tolerance: float,
               fn: Callable[[], Tuple[Optional[mpf], str]],
               passes: Optional[Callable[[Optional[mpf]], bool]] = None) -> VerifyCheck:
        """执行 fn() -> (残差, 备注)，默认残差 <= 容差即通过"""
        try:
            residual, note = fn()
        except QCalcError as e:
            logger.warning(f"检查 {identity} 出错: {e.message}")
            return VerifyCheck(identity, anchor, None, tolerance, False,
                               f"{type(e).__name__}: {e.message}")
        if passes is not None:
            ok = passes(residual)
        else:
            ok = residual is not None and residual <= tolerance
        if not ok:
            logger.warning(f"检查 {identity} 未通过: 残差 {residual}，容差 {tolerance}")
        return VerifyCheck(identity, anchor, residual, tolerance, ok, note)

    def _tol(self, binary64: float, extended: float) -> float:
        return extended if self.qp.precision is Precision.EXTENDED else binary64

    def _skipped(self, identity: str, anchor: str, tolerance: float, reason: str) -> VerifyCheck:
        return VerifyCheck(identity, anchor, None, tolerance, True, f"skipped: {reason}")

    # ------------------------------------------------------------------ core

    def _suite_core(self) -> List[VerifyCheck]:
        qp = self.qp
        checks = []

        def pochhammer():
            with mp.workdps(self.dps):
                q = qp.base()
                return max(_rel(q_pochhammer(a, q, prod_tol=qp.prod_tol), mp.qp(a, q))
                           for a in (mpf('0.5'), mpf('-0.3'), q ** 3)), ""

        checks.append(self._check("pochhammer-vs-mpmath", "(a;q)_∞ = ∏(1 - a q^k)",
                                  self._tol(1e-13, 1e-24), pochhammer))

        def gamma_mpmath():
            with mp.workdps(self.dps):
                return max(_rel(q_gamma(x, qp), mp.qgamma(x, qp.base()))
                           for x in (mpf('0.5'), mpf('2.5'), mpf(4))), ""

        checks.append(self._check("qgamma-vs-mpmath",
                                  "Γ_q(x) = (q;q)_∞/(q^x;q)_∞ (1-q)^{1-x}",
                                  self._tol(1e-12, 1e-22), gamma_mpmath))

        def gamma_functional():
            with mp.workdps(self.dps):
                q = qp.base()
                return max(_rel(q_gamma(x + 1, qp), (1 - q ** x) / (1 - q) * q_gamma(x, qp))
                           for x in (mpf('0.3'), mpf('1.7'), mpf(3))), ""

        checks.append(self._check("qgamma-functional", "Γ_q(x+1) = [x]_q Γ_q(x)",
                                  self._tol(1e-12, 1e-22), gamma_functional))

        def reciprocity():
            with mp.workdps(self.dps):
                q = qp.base()
                points = [s * v for v in (q ** 3, q, mpf(1)) for s in (1, -1)]
                return max(abs(q_exp_e(x, qp) * q_exp_E(-x, qp) - 1) for x in points), ""

        checks.append(self._check("exp-reciprocity", "e(x;q) E(-x;q) = 1",
                                  self._tol(1e-12, 1e-24), reciprocity))

        def fundamental_theorem():
            rng = np.random.default_rng(self.seed)
            grid = QGrid(qp, 0, 20)
            worst = mpf(0)
            with mp.workdps(self.dps):
                for _ in range(100):
                    f = _random_function(grid, rng)
                    scale = f.sup_norm()
                    integral = cumulative_jackson(f)
                    for k in range(grid.k_min, grid.k_max):
                        worst = max(worst, abs(q_derivative(integral, k) - f.at(k)) / scale)
                    w = grid.weights()
                    derivs = [q_derivative(f, k) for k in range(grid.k_min, grid.k_max)]
                    telescoped = mp.fsum(d * w[i] for i, d in enumerate(derivs))
                    worst = max(worst, abs(telescoped - (f.at(grid.k_min) - f.at(grid.k_max)))
                                / scale)
            return worst, "100 个随机网格函数"

        checks.append(self._check("fundamental-theorem",
                                  "D_q ∫_0^x f d_q t = f(x), ∫_a^b D_q f d_q x = f(b) - f(a)",
                                  self._tol(1e-13, 1e-25), fundamental_theorem))

        def jackson_examples():
            with mp.workdps(self.dps):
                q = qp.base()
                first = _rel(jackson_0_to_a(lambda x: x, QPoint(0), qp), 1 / (1 + q))
                second = _rel(jackson_a_to_inf(lambda x: 1 / (x * x), QPoint(0), qp), q)
                return max(first, second), "∫_0^1 x = 1/(1+q), ∫_1^∞ x^{-2} = q"

        checks.append(self._check("jackson-examples", "(1-q) Σ f(q^n) q^n",
                                  self._tol(1e-13, 1e-24), jackson_examples))

        def scaling():
            with mp.workdps(self.dps):
                q2 = qp.base() ** 2

                def f(x):
                    return 1 / q_pochhammer(-(1 - q2) * x * x, q2, prod_tol=qp.prod_tol)

                whole = jackson_0_to_inf(f, qp)
                worst = max(_rel(jackson_0_to_inf(lambda x, n=n: f(qp.power(n) * x), qp),
                                 qp.power(-n) * whole)
                            for n in range(-3, 4))
            return worst, "f(x) = 1/(-(1-q²)x²;q²)_∞, n ∈ [-3, 3]"

        checks.append(self._check("scaling-identity",
                                  "∫_0^∞ f(q^n x) d_q x = q^{-n} ∫_0^∞ f(x) d_q x",
                                  self._tol(1e-12, 1e-24), scaling))

        def integration_by_parts():
            rng = np.random.default_rng(self.seed + 1)
            grid = QGrid(qp, 0, 20)
            ks = range(grid.k_min + 1, grid.k_max)
            worst = mpf(0)
            with mp.workdps(self.dps):
                q = qp.base()
                w = grid.weights()
                for _ in range(20):
                    f = _compact_function(grid, rng)
                    g = _compact_function(grid, rng)
                    lhs = mp.fsum(f.at(k) * q_derivative(g, k) * w[grid.index(k)] for k in ks)
                    rhs = -mp.fsum(q_derivative(f, k - 1) / q * g.at(k) * w[grid.index(k)]
                                   for k in ks)
                    worst = max(worst, abs(lhs - rhs) / (f.sup_norm() * g.sup_norm()))
            return worst, "20 对紧支撑随机网格函数"

        checks.append(self._check("integration-by-parts",
                                  "∫ f D_q g d_q x = [fg]_0^∞ - ∫ D_q(f(q^{-1}·)) g d_q x",
                                  self._tol(1e-10, 1e-25), integration_by_parts))

        def structural_roots():
            with mp.workdps(40):
                worst = mpf(0)
                for m in (1, 2, 3):
                    q = structural_q(m).base()
                    worst = max(worst, abs(q ** m + q - 1))
                return worst, "m = 1, 2, 3"

        checks.append(self._check("structural-roots", "q^m + q - 1 = 0",
                                  self._tol(1e-30, 1e-35), structural_roots))
        return checks

    # ------------------------------------------------------------------ trig

    def _suite_trig(self) -> List[VerifyCheck]:
        qp, grid = self.qp, self.grid
        checks = []

        def pythagorean():
            c1 = grid_eval_trig('cos', 1, grid)
            c2 = grid_eval_trig('cos', 0.5, grid)
            s1 = grid_eval_trig('sin', 1.5, grid)
            s2 = grid_eval_trig('sin', 1, grid)
            with mp.workdps(max(c1.dps, c2.dps, s1.dps, s2.dps)):
                factor = qp.power(-1.5)
                return max(abs(c1.at(k) * c2.at(k) + factor * s1.at(k) * s2.at(k) - 1)
                           for k in grid.exponents()), f"k ∈ [{grid.k_min}, {grid.k_max}]，网格递推"

        pythagorean_anchor = "cos(qx;q²)cos(q^{1/2}x;q²) + q^{-3/2} sin(q^{3/2}x;q²) sin(qx;q²) = 1"
        checks.append(self._check("q-pythagorean", pythagorean_anchor, self._tol(1e-9, 1e-20),
                                  pythagorean))

        if qp.precision is Precision.EXTENDED:
            def pythagorean_ill_conditioned():
                worst = mpf(0)
                used = []
                for k in grid.exponents():
                    c1 = q_cos(QPoint(1 + k), qp)
                    if c1.condition < ILL_CONDITIONED:
                        continue
                    c2 = q_cos(QPoint(0.5 + k), qp)
                    s1 = q_sin(QPoint(1.5 + k), qp)
                    s2 = q_sin(QPoint(1 + k), qp)
                    with mp.workdps(max(r.dps for r in (c1, c2, s1, s2))):
                        value = c1.value * c2.value + qp.power(-1.5) * s1.value * s2.value
                        worst = max(worst, abs(value - 1))
                    used.append(k)
                if not used:
                    return worst, "窗口内没有条件数 >= 1e10 的网格点"
                return worst, f"级数求值，k ∈ {used}"

            checks.append(self._check("q-pythagorean-ill-conditioned", pythagorean_anchor, 1e-20,
                                      pythagorean_ill_conditioned))
        else:
            checks.append(self._skipped("q-pythagorean-ill-conditioned", pythagorean_anchor, 1e-20,
                                        "条件数 >= 1e10 的网格点只在 extended 精度下检查"))

        def derivatives():
            cos = grid_eval_trig('cos', 0, grid)
            sin = grid_eval_trig('sin', 0, grid)
            with mp.workdps(max(cos.dps, sin.dps)):
                q = qp.base()
                worst = mpf(0)
                for k in range(grid.k_min, grid.k_max):
                    scale = max(1, abs(cos.at(k)), abs(sin.at(k)))
                    d_cos = q_derivative(cos, k) + sin.at(k + 1) / q
                    d_sin = q_derivative(sin, k) - cos.at(k)
                    worst = max(worst, abs(d_cos) / scale, abs(d_sin) / scale)
                return worst, ""

        checks.append(self._check("derivative-relations",
                                  "D_q cos(x;q²) = -q^{-1} sin(qx;q²), D_q sin(x;q²) = cos(x;q²)",
                                  self._tol(1e-10, 1e-20), derivatives))

        anchor = "|cos(x;q²)|, |sin(x;q²)| <= 1/(q;q²)_∞²"
        if qp.is_structural:
            def bounds():
                cos = grid_eval_trig('cos', 0, grid)
                sin = grid_eval_trig('sin', 0, grid)
                bound = qp.cos_sin_bound
                excess = max(max(abs(cos.at(k)), abs(sin.at(k))) / bound - 1
                             for k in grid.exponents())
                return max(excess, mpf(0)), f"B = {mp.nstr(bound, 10)}"

            checks.append(self._check("trig-bounds", anchor, 1e-12, bounds))
        else:
            checks.append(self._skipped("trig-bounds", anchor, 1e-12,
                                        "q 不满足 1-q = q^m，界只在结构性底数下成立"))

        def recurrence_vs_series():
            values = grid_eval_trig('cos', 0, grid)
            worst = mpf(0)
            compared = 0
            for k in grid.exponents():
                report = q_cos(QPoint(k), qp)
                if report.condition < ILL_CONDITIONED:
                    compared += 1
                    with mp.workdps(max(values.dps, report.dps)):
                        scale = max(abs(report.value), mpf(1))
                        worst = max(worst, abs(values.at(k) - report.value) / scale)
            return worst, f"{compared} 个良态网格点"

        checks.append(self._check("recurrence-vs-series",
                                  "q u(x) - (1+q) u(qx) + u(q²x) = -q(1-q)²(λx)² u(qx)",
                                  self._tol(1e-9, 1e-20), recurrence_vs_series))

        def reductions():
            worst = mpf(0)
            with mp.workdps(self.dps):
                for k in range(-5, 11):
                    x = QPoint(k)
                    xv = qp.resolve(x)
                    worst = max(worst, abs(j_alpha(x, -0.5, qp).value - q_cos(x, qp).value))
                    worst = max(worst, abs(j_alpha(x, 0.5, qp).value - q_sin(x, qp).value / xv))
            return worst, "k ∈ [-5, 10]"

        checks.append(self._check("bessel-reductions",
                                  "j_{-1/2}(x;q²) = cos(x;q²), j_{1/2}(x;q²) = sin(x;q²)/x",
                                  self._tol(1e-12, 1e-20), reductions))

        def classical_limit():
            errors = []
            for q in (0.9, 0.99, 0.999):
                qp_q = make_q_param(q)
                with mp.workdps(self.dps):
                    errors.append(abs(q_cos(1, qp_q).value - mp.cos(1)))
            monotone = errors[0] > errors[1] > errors[2]
            note = ", ".join(mp.nstr(e, 6) for e in errors)
            return (errors[-1] if monotone else mp.inf), f"q = 0.9, 0.99, 0.999: {note}"

        checks.append(self._check("classical-limit", "cos(x;q²) → cos x (q → 1)", 1e-2,
                                  classical_limit))
        return checks

    # ------------------------------------------------------------------ sturm

    def _sturm_grid(self) -> QGrid:
        return QGrid(self.qp, -10, 30)

    def _suite_sturm(self) -> List[VerifyCheck]:
        qp = self.qp
        grid = self._sturm_grid()
        checks = []

        def wronskian():
            worst_spread = worst_forms = mpf(0)
            for K in (0, 4):
                u1 = homogeneous_solution(1, 0, QPoint(-K), grid)
                u2 = homogeneous_solution(0, 1, QPoint(-K), grid)
                for k in range(grid.k_min, grid.k_max):
                    w = q_wronskian(u1, u2, k)
                    worst_spread = max(worst_spread, abs(w.value - 1))
                    worst_forms = max(worst_forms, w.discrepancy)
            return max(worst_spread, worst_forms * 100), \
                f"spread {mp.nstr(worst_spread, 3)}, wr1-wr2 {mp.nstr(worst_forms, 3)}"

        checks.append(self._check("wronskian-constancy",
                                  "W = u1(qx) D_q u2 - u2(qx) D_q u1 = 1",
                                  self._tol(1e-10, 1e-18), wronskian))

        def zero_potential_exactness():
            worst = mpf(0)
            p = zero_potential(grid)
            for K in (4, 8, 12):
                for problem in Problem:
                    bc = BoundaryParams(0.3, problem)
                    sol = solve(p, QPoint(-K), bc)
                    with mp.workdps(sol.dps):
                        a, b = bc.initial_data(qp)
                        expected = homogeneous_solution(a, b, QPoint(-K), grid)
                        diff = (sol.u - expected).sup_norm() / expected.sup_norm()
                    worst = max(worst, diff)
            return worst, "K = 4, 8, 12；E1 与 E2"

        checks.append(self._check("solver-zero-potential", "φ = h when p ≡ 0",
                                  self._tol(1e-12, 1e-18), zero_potential_exactness))

        p_compact = compact_potential(grid, 0, 5, 0.1)

        def picard():
            worst = mpf(0)
            for K in (4, 8):
                bc = BoundaryParams(0.3, Problem.E1)
                sol = solve(p_compact, QPoint(-K), bc)
                oracle = picard_solve(p_compact, QPoint(-K), bc)
                with mp.workdps(sol.dps):
                    worst = max(worst, (sol.u - oracle.u).sup_norm() / sol.u.sup_norm())
            return worst, "compact:0:5:0.1"

        checks.append(self._check("picard-oracle", "forward substitution = Picard fixed point",
                                  1e-10, picard))

        def main_identity():
            notes = []
            worst = mpf(0)
            monotone = True
            for alpha in (0.0, 0.3):
                previous = None
                for K in (8, 10, 12):
                    phi = solve(p_compact, QPoint(-K), BoundaryParams(alpha, Problem.E1))
                    theta = solve(p_compact, QPoint(-K), BoundaryParams(alpha, Problem.E2))
                    report = main_identity_report(coeffs_fitted(phi), coeffs_fitted(theta))
                    worst = max(worst, report.residual)
                    if previous is not None and report.residual > max(previous, mpf(10) ** -12):
                        monotone = False
                    previous = report.residual
                    ratio = mp.nstr(report.printed_ratio, 8)
                    notes.append(f"α={alpha},K={K}: |μν1-νμ1|q^(1/2)λ={ratio}")
            if not monotone:
                worst = max(worst, mpf(1))
            return worst, "; ".join(notes)

        checks.append(self._check("main-identity",
                                  "μν1 - νμ1 = -q^{1/2} / (λ Π_p), Π_p = ∏(1 - (1-q)² x² p)",
                                  1e-4, main_identity))

        def bracket():
            worst = mpf(0)
            for coupling in Coupling:
                p = compact_potential(grid, 0, 5, 0.1, coupling)
                phi = solve(p, QPoint(-6), BoundaryParams(0.3, Problem.E1))
                theta = solve(p, QPoint(-6), BoundaryParams(0.3, Problem.E2))
                for point in bracket_profile(phi, theta, p):
                    worst = max(worst, point.residual / abs(point.expected))
            return worst, "point 与 shifted 耦合"

        checks.append(self._check("bracket-profile",
                                  "[φ,θ]_q(x) = -q^{1/2} / ∏_{j>=0}(1 - (1-q)² q^{2j} x² p(q^j x))",
                                  1e-9, bracket))

        def gronwall():
            failures = []
            for K in (4, 8, 12):
                sol = solve(p_compact, QPoint(-K), BoundaryParams(0.3, Problem.E1))
                report = certify_solution(sol, p_compact)
                if not report.passed:
                    failures.append(K)
            return mpf(len(failures)), f"未通过的 K: {failures}" if failures else "K = 4, 8, 12"

        checks.append(self._check("gronwall-certificate",
                                  "f <= C + ∫ f g  ⇒  f <= C / ∏(1 - (1-q) q^j x g)", 0.0,
                                  gronwall))

        def green():
            rng = np.random.default_rng(self.seed)
            small = QGrid(qp, 0, 20)
            worst = mpf(0)
            with mp.workdps(self.dps):
                for coupling in Coupling:
                    p = Potential(_random_function(small, rng), coupling)
                    U = _random_function(small, rng)
                    V = _random_function(small, rng)
                    for k in range(small.k_min, small.k_max - 1):
                        scale = max(mpf(1), qp.power(-2 * k))
                        worst = max(worst, green_formula_residual(U, V, p, k) / scale)
            return worst, "随机网格函数与位势"

        checks.append(self._check("green-formula",
                                  "D_q[U,V] = U(qx) LV - V(qx) LU + (1-q) x p [U,V]",
                                  self._tol(1e-10, 1e-20), green))

        def integral_vs_fitted():
            worst = mpf(0)
            for problem in Problem:
                sol = solve(p_compact, QPoint(-10), BoundaryParams(0.3, problem))
                fitted = coeffs_fitted(sol)
                integral = coeffs_integral(sol, p_compact)
                with mp.workdps(sol.dps):
                    for name in ("mu", "nu", "mu1", "nu1"):
                        a, b = getattr(fitted, name), getattr(integral, name)
                        if a is not None:
                            worst = max(worst, _rel(a, b))
            return worst, "λ = q^{-10}"

        checks.append(self._check("coefficients-integral-vs-fitted",
                                  "μ = a - q^{-1/2}λ^{-1}∫ sin(q^{3/2}λy) f, "
                                  "ν = λ^{-1}(b + ∫ cos(qλy) f)",
                                  1e-5, integral_vs_fitted))
        return checks

    # ------------------------------------------------------------------ bessel

    def _suite_bessel(self) -> List[VerifyCheck]:
        qp = self.qp
        grid = QGrid(qp, -5, 15)
        checks = []

        def ode():
            worst = mpf(0)
            for alpha in (0.0, 0.5, 1.0):
                for K in (2, 6, 10):
                    worst = max(worst, bessel_ode_residual(alpha, QPoint(-K), grid))
            return worst, "α ∈ {0, 0.5, 1}, K ∈ {2, 6, 10}"

        checks.append(self._check("bessel-ode", "Δ_{q,α} j_α(λx) + λ² j_α(λx) = 0", 1e-9, ode))

        def delta_forms():
            worst = mpf(0)
            for alpha in (0.0, 0.5, 1.0):
                f = bessel_grid_values(alpha, -2, grid)
                with mp.workdps(f.dps):
                    scale = f.sup_norm() * qp.power(-4)
                    for k in range(grid.k_min + 1, grid.k_max):
                        forms = delta_q_alpha(f, alpha, k)
                        worst = max(worst, abs(forms.first - forms.second) / scale)
            return worst, ""

        checks.append(self._check("delta-forms",
                                  "x^{-(2α+1)} D_q[x^{2α+1} D_q f](q^{-1}x) = q^{2α+1} Δ_q f"
                                  " + (1-q^{2α+1}) q D_q f(q^{-1}x) / ((1-q)x)",
                                  self._tol(1e-12, 1e-20), delta_forms))

        def delta_monomial():
            worst = mpf(0)
            with mp.workdps(self.dps):
                q = qp.base()
                square = GridFunction.from_callable(grid, lambda k, x: x * x)
                for alpha in (0.0, 0.5, 1.0):
                    expected = (1 + q) * (1 - q ** (2 * alpha + 2)) / (1 - q)
                    for k in range(grid.k_min + 1, grid.k_max):
                        worst = max(worst, _rel(delta_q_alpha(square, alpha, k).second, expected))
            return worst, ""

        checks.append(self._check("delta-monomial", "Δ_{q,α} x² = (1+q)(1-q^{2α+2})/(1-q)",
                                  self._tol(1e-12, 1e-20), delta_monomial))

        def recurrence():
            worst = mpf(0)
            for alpha in (0.0, 1.0):
                marched = grid_eval_bessel(alpha, -2, grid)
                series = bessel_grid_values(alpha, -2, grid)
                with mp.workdps(max(marched.dps, series.dps)):
                    worst = max(worst, (marched - series).sup_norm() / series.sup_norm())
            return worst, "λ = q^{-2}"

        checks.append(self._check("bessel-recurrence-vs-series",
                                  "f_k = f_{k+1} + q^{2α}(f_{k+1} - f_{k+2})"
                                  " - λ²(1-q)² q^{2k} f_{k+1}",
                                  1e-9, recurrence))

        def basis_wronskian():
            values = bessel_basis_wronskian(0.0, QPoint(-2), QGrid(qp, 0, 20))
            with mp.workdps(60):
                reference = values[-1]
                return max(_rel(v, reference) for v in values), ""

        checks.append(self._check("bessel-wronskian", "x^{2α+1}(y1 D_q y2 - y2 D_q y1) = const",
                                  1e-8, basis_wronskian))

        remainder_anchor = "j_α(λx;q²) = cos(q^{-α-1/2}λx;q²) + R, |R| <= C_q/(λx)"
        for alpha in (0.5, 1.0):
            identity = f"remainder-decay-alpha-{alpha:g}"
            if not principal_on_lattice(alpha, qp):
                def flagged(alpha=alpha):
                    reports = [bessel_remainder(QPoint(0), QPoint(-K), alpha, qp)
                               for K in (4, 8, 12)]
                    values = ", ".join(mp.nstr(abs(r.remainder), 6) for r in reports)
                    return None, f"skipped: 主项不在格点上，仅报告 |R| = {values}"

                checks.append(self._check(identity, remainder_anchor, 1.0, flagged,
                                          passes=lambda r: True))
                continue

            def decay(alpha=alpha):
                reports = [bessel_remainder(QPoint(0), QPoint(-K), alpha, qp) for K in (4, 8, 12)]
                magnitudes = [abs(r.remainder) for r in reports]
                decreasing = magnitudes[0] > magnitudes[1] > magnitudes[2]
                ratio = max(abs(r.remainder) / r.bound for r in reports)
                note = ", ".join(mp.nstr(m, 6) for m in magnitudes)
                return (ratio if decreasing else mp.inf), f"|R| (K=4,8,12) = {note}"

            checks.append(self._check(identity, remainder_anchor, 1.1, decay))

        def hahn_exton():
            worst = mpf(0)
            with mp.workdps(self.dps):
                q = qp.base()
                for alpha in (0.0, 0.5, 1.0):
                    x = q ** 3
                    z = (1 - q) * x / q
                    rhs = (q_gamma(alpha + 1, qp, base_power=2) * q ** alpha * (1 + q) ** alpha
                           * x ** (-alpha) * hahn_exton_J(z, alpha, qp, base_power=2))
                    worst = max(worst, _rel(j_alpha(QPoint(3), alpha, qp).value, rhs))
            return worst, "x = q³"

        checks.append(self._check("hahn-exton-relation",
                                  "j_α(x;q²) = Γ_{q²}(α+1) q^α (1+q)^α x^{-α} J_α(q^{-1}(1-q)x;q²)",
                                  self._tol(1e-12, 1e-20), hahn_exton))
        return checks

    # ------------------------------------------------------------------ weber

    def _suite_weber(self) -> List[VerifyCheck]:
        qp = self.qp
        checks = []

        def positivity():
            values = [weber_A_alpha(alpha, qp) for alpha in (-0.5, 0.0, 1.0)]
            return mpf(sum(1 for v in values if v <= 0)), ", ".join(mp.nstr(v, 8) for v in values)

        checks.append(self._check("weber-normalization-positive",
                                  "A_α = ∫ x^{2α+1} / (-(1-q²)x²;q²)_∞ d_q x > 0", 0.0, positivity))

        weber_anchor = ("∫ e(-a²x²;q²) j_α(λx) x^{2α+1} d_q x "
                        "= A_α a^{-2α-2} e(-q^{-2α-2}λ² / ((1+q)² a²); q²)")
        if qp.is_structural:
            def weber():
                worst = mpf(0)
                for alpha in (-0.25, 0.0, 0.5, 1.0):
                    for a_exp in (1, 0, -1):
                        for K in (1, 4):
                            report = weber_integral(QPoint(a_exp), QPoint(-K), alpha, qp)
                            worst = max(worst, report.residual)
                return worst, "α ∈ {-0.25, 0, 0.5, 1}, t ∈ {q², 1, q^{-2}}, λ ∈ {q^{-1}, q^{-4}}"

            checks.append(self._check("weber-identity", weber_anchor, 1e-8, weber))
        else:
            checks.append(self._skipped("weber-identity", weber_anchor, 1e-8,
                                        "格点上的 j_α 有界性需要结构性底数"))

        def ramanujan():
            worst = mpf(0)
            for alpha, t in ((0.5, mpf(1)), (0.0, mpf(1)), (1.0, qp.power(2))):
                worst = max(worst, _rel(ramanujan_B_alpha(t, alpha, qp),
                                        ramanujan_direct_sum(t, alpha, qp)))
            return worst, ""

        checks.append(self._check(
            "ramanujan-sum",
            "Σ q^{(2α+1)n}/(a q^{2n};q²)_∞ = (q², -q^{2α}(1-q²)t, -q^{2-2α}/((1-q²)t); q²)_∞ "
            "/ (q^{2α+1}, -q^{-1}(1-q²)t, -q³/((1-q²)t); q²)_∞",
            1e-8, ramanujan))

        def moment():
            worst = mpf(0)
            with mp.workdps(self.dps):
                q = qp.base()
                for alpha in (0.5, 1.0):
                    worst = max(worst, _rel(heat_moment(1, alpha, qp),
                                            (1 - q) * ramanujan_B_alpha(1, alpha, qp)))
            return worst, ""

        checks.append(self._check("heat-moment", "∫ e(-q^{-1}t x²;q²) x^{2α} d_q x = (1-q) B_α(t)",
                                  self._tol(1e-10, 1e-18), moment))

        theta_anchor = "Θ_α(λ,t) = E_α(t,λ) - ∫ e(-t x²) cos(q^{-α-1/2}λx) x^{2α+1} → 0"
        if principal_on_lattice(0.5, qp):
            def theta():
                records = [heat_kernel(QPoint(0), QPoint(-K), 0.5, qp) for K in (4, 12)]
                small, large = (abs(r.theta) for r in records)
                return (large / small if small != 0 else mp.inf), \
                    f"|Θ| (K=4) = {mp.nstr(small, 6)}, (K=12) = {mp.nstr(large, 6)}"

            checks.append(self._check("heat-theta-decay", theta_anchor, 1.0, theta,
                                      passes=lambda r: r is not None and r < 1))
        else:
            checks.append(self._skipped("heat-theta-decay", theta_anchor, 1.0,
                                        "主项不在格点上"))
        return checks

