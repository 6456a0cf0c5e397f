"""q-Sturm-Liouville 求解模块

在截断网格 {q^k} 上求解
    (E1)/(E2):  -D_q^2 u + p u = λ^2 u(qx)
的 Volterra 形式，并提供 q-Wronskian、括号 [U,V]_q、q-Green 公式残差、
q-Gronwall 证书以及渐近系数 μ, ν, μ1, ν1 的两种提取方法。

核函数 K(x,t) = u1(qt) u2(x) - u2(qt) u1(x)，其中
    u1 = cos(λx;q^2),  u2 = q^{-1/2} λ^{-1} sin(q^{1/2} λx;q^2)
是 W[u1,u2] = 1 的齐次基。核可分离，所以前向代换只需两个累加和。
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from mpmath import mp, mpf

from src.core.errors import (
    QConditioningError, QDomainError, QEvaluationError, QPoleError, QRangeError,
    QSingularityError,
)
from src.core.qcore import (
    Argument, GridFunction, QGrid, QParam, QPoint, Real,
    json_real, grid_jackson, q_derivative, q_derivative2, q_pochhammer, to_mpf,
)
from src.core.qspecial import grid_dps, grid_eval_trig, q_cos, q_exp_e, q_sin

logger = logging.getLogger('qsturm')

DEFAULT_PIVOT_TOL = 1e-8
DEFAULT_FIT_TOL = 1e-6
PRODUCT_SINGULAR_TOL = 1e-14
SUPPORT_REL_TOL = 1e-30
MIN_FIT_POINTS = 8
DEFAULT_PICARD_SWEEPS = 200
DEFAULT_PICARD_TOL = 1e-14


class Problem(str, Enum):
    """初值问题类型"""
    E1 = "E1"
    E2 = "E2"


class Coupling(str, Enum):
    """位势耦合方式

    point:   L u = D^2 u - p(x) u(x)
    shifted: L u = D^2 u - p(x) u(qx)
    """
    POINT = "point"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class BoundaryParams:
    """初值参数 α 及问题类型"""
    alpha_bc: float
    problem: Problem = Problem.E1

    def initial_data(self, qp: QParam) -> Tuple[mpf, mpf]:
        """返回 (u(0), D_q u(0))"""
        alpha = self.alpha_bc
        if Problem(self.problem) is Problem.E1:
            a = q_sin(QPoint(1, alpha), qp).value / qp.base()
            b = q_cos(QPoint(1, alpha), qp).value
        else:
            a = mp.sqrt(qp.base()) * q_cos(QPoint(0.5, alpha), qp).value
            b = -q_sin(QPoint(1.5, alpha), qp).value
        return a, b


@dataclass(frozen=True, eq=False)
class Potential:
    """网格上的位势 p 及其耦合方式"""
    p: GridFunction
    coupling: Coupling = Coupling.POINT

    def __post_init__(self):
        object.__setattr__(self, 'coupling', Coupling(self.coupling))

    @property
    def grid(self) -> QGrid:
        return self.p.grid

    @property
    def norm_inf(self) -> mpf:
        return self.p.sup_norm()

    @property
    def norm_1(self) -> mpf:
        return grid_jackson(self.p.abs())

    def support(self, rel_tol: float = 0.0) -> Optional[Tuple[int, int]]:
        """|p| > rel_tol·‖p‖∞ 的指数范围 (k_lo, k_hi)；p ≡ 0 时为 None"""
        norm = self.norm_inf
        if norm == 0:
            return None
        threshold = to_mpf(rel_tol) * norm
        ks = [k for k, v in self.p.items() if abs(v) > threshold]
        return min(ks), max(ks)

    def pivot_factors(self) -> Dict[int, mpf]:
        """1 - (1-q)^2 x^2 p(x)，shifted 耦合下恒为 1"""
        qp = self.grid.qp
        with mp.workdps(self.p.dps):
            q = qp.base()
            if self.coupling is Coupling.SHIFTED:
                return {k: mpf(1) for k in self.grid.exponents()}
            return {k: 1 - (1 - q) ** 2 * qp.power(2 * k) * v for k, v in self.p.items()}

    def bracket_factor(self) -> mpf:
        """Π_p = ∏ (1 - (1-q)^2 x_k^2 p_k)"""
        with mp.workdps(self.p.dps):
            return mp.fprod(self.pivot_factors().values())

    def first_order_coefficient(self) -> GridFunction:
        """括号满足 D_q W + a W = 0 时的系数 a(x) = -(1-q) x p(x)"""
        qp = self.grid.qp
        if self.coupling is Coupling.SHIFTED:
            return GridFunction.constant(self.grid, 0)
        with mp.workdps(self.p.dps):
            q = qp.base()
            return GridFunction.from_callable(self.grid, lambda k, x: -(1 - q) * x * self.p.at(k))


def zero_potential(grid: QGrid, coupling: Coupling = Coupling.POINT) -> Potential:
    return Potential(GridFunction.constant(grid, 0), coupling)


def compact_potential(grid: QGrid, k_lo: int, k_hi: int, value: Real,
                      coupling: Coupling = Coupling.POINT) -> Potential:
    """在 k_lo <= k <= k_hi 上取常数 value，其余为 0

    Raises:
        QRangeError: 支撑不在网格内
    """
    grid.index(k_lo)
    grid.index(k_hi)
    if k_lo > k_hi:
        raise QRangeError("支撑区间为空", {"k_lo": k_lo, "k_hi": k_hi})
    value = to_mpf(value)
    return Potential(GridFunction.from_callable(
        grid, lambda k, x: value if k_lo <= k <= k_hi else mpf(0)), coupling)


def gaussian_potential(grid: QGrid, value: Real, coupling: Coupling = Coupling.POINT) -> Potential:
    """p(x) = value·E(-x^2;q^2)^{-1} = value / (-(1-q^2)x^2;q^2)_∞"""
    qp = grid.qp
    value = to_mpf(value)
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        q2 = qp.power(2)
        return Potential(GridFunction.from_callable(
            grid, lambda k, x: value / q_pochhammer(-(1 - q2) * x * x, q2, prod_tol=qp.prod_tol)),
            coupling)


def potential_from_csv(path: str, grid: QGrid, coupling: Coupling = Coupling.POINT) -> Potential:
    return Potential(GridFunction.from_csv(path, grid), coupling)


def parse_potential_spec(spec: str, grid: QGrid,
                         coupling: Union[Coupling, str] = Coupling.POINT) -> Potential:
    """解析位势描述: zero | compact:k_lo:k_hi:c | gaussian:c | csv:PATH

    Raises:
        QDomainError: 描述格式错误
    """
    coupling = Coupling(coupling)
    kind, _, rest = spec.partition(':')
    try:
        if kind == 'zero' and not rest:
            return zero_potential(grid, coupling)
        if kind == 'compact':
            k_lo, k_hi, value = rest.split(':')
            return compact_potential(grid, int(k_lo), int(k_hi), float(value), coupling)
        if kind == 'gaussian':
            return gaussian_potential(grid, float(rest), coupling)
        if kind == 'csv' and rest:
            return potential_from_csv(rest, grid, coupling)
    except ValueError as e:
        raise QDomainError(f"位势描述无法解析: {spec}", {"reason": str(e)})
    raise QDomainError(f"未知的位势描述: {spec}",
                       {"expected": "zero | compact:k_lo:k_hi:c | gaussian:c | csv:PATH"})


@dataclass(frozen=True, eq=False)
class Solution:
    """前向代换的解 φ（E1）或 θ（E2）

    below 是网格下方一点 q^{k_max+1} 处的齐次延拓值。
    """
    u: GridFunction
    K: int
    bc: BoundaryParams
    coupling: Coupling
    ode_residual_max: mpf
    ode_residual_rel: mpf
    bracket_factor: mpf
    support: Optional[Tuple[int, int]]
    dps: int
    below: mpf

    @property
    def grid(self) -> QGrid:
        return self.u.grid

    @property
    def lam(self) -> mpf:
        return self.grid.qp.power(-self.K)


@dataclass(frozen=True)
class AsymCoeffs:
    """渐近系数；E1 填 (mu, nu)，E2 填 (mu1, nu1)"""
    K: int
    method: str
    qp: QParam
    dps: int
    mu: Optional[mpf] = None
    nu: Optional[mpf] = None
    mu1: Optional[mpf] = None
    nu1: Optional[mpf] = None
    fit_residual: Optional[mpf] = None
    bracket_factor: mpf = mpf(1)

    def merge(self, other: 'AsymCoeffs') -> 'AsymCoeffs':
        """合并 E1 与 E2 的系数（同一 λ、同一方法）"""
        if other.K != self.K or other.method != self.method:
            raise QDomainError("只能合并同一 λ、同一方法的系数",
                               {"K": (self.K, other.K), "method": (self.method, other.method)})
        residuals = [r for r in (self.fit_residual, other.fit_residual) if r is not None]
        return replace(
            self,
            mu=self.mu if self.mu is not None else other.mu,
            nu=self.nu if self.nu is not None else other.nu,
            mu1=self.mu1 if self.mu1 is not None else other.mu1,
            nu1=self.nu1 if self.nu1 is not None else other.nu1,
            fit_residual=max(residuals) if residuals else None,
            dps=max(self.dps, other.dps),
        )

    def to_dict(self) -> Dict[str, Any]:
        fmt = json_real
        with mp.workdps(self.dps):
            lam = self.qp.power(-self.K)
        return {
            "lambda": fmt(lam), "K": self.K, "method": self.method,
            "mu": fmt(self.mu), "nu": fmt(self.nu), "mu1": fmt(self.mu1), "nu1": fmt(self.nu1),
            "fit_residual": fmt(self.fit_residual),
        }


@dataclass(frozen=True)
class Wronskian:
    """q-Wronskian 的两种写法：value 为 u1(qx)D u2 - u2(qx)D u1，alt_value 为差商形式"""
    value: mpf
    alt_value: mpf

    @property
    def discrepancy(self) -> mpf:
        return abs(self.value - self.alt_value)


@dataclass(frozen=True)
class GronwallPoint:
    k: int
    f: mpf
    bound: Optional[mpf]
    margin: Optional[mpf]
    hypothesis_ok: bool
    in_domain: bool
    valid: bool
    certified: bool


@dataclass(frozen=True)
class GronwallReport:
    """q-Gronwall 证书

    valid_to 是有效前缀（从最小的 x 向外，前提处处成立且乘积因子为正）
    所达到的最小指数 k；passed 表示有效前缀上结论全部成立。
    """
    points: Tuple[GronwallPoint, ...]
    valid_to: Optional[int]
    passed: bool
    hypothesis_violations: int
    printed_bounds: Dict[int, mpf]

    @property
    def min_margin(self) -> Optional[mpf]:
        margins = [pt.margin for pt in self.points if pt.valid]
        return min(margins) if margins else None

    def to_dict(self) -> Dict[str, Any]:
        margin = self.min_margin
        return {
            "passed": self.passed,
            "valid_to": self.valid_to,
            "hypothesis_violations": self.hypothesis_violations,
            "min_margin": None if margin is None else json_real(margin),
            "points": len(self.points),
        }


@dataclass(frozen=True)
class MainIdentityReport:
    """μν1 - νμ1 与推导目标 -q^{1/2}/(λΠ_p) 及印刷目标 1/(q^{1/2}λ) 的比较"""
    value: mpf
    target: mpf
    printed_target: mpf
    residual: mpf
    printed_ratio: mpf
    sign: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": json_real(self.value),
            "target": json_real(self.target),
            "printed_target": json_real(self.printed_target),
            "residual": json_real(self.residual),
            "printed_ratio": json_real(self.printed_ratio),
            "sign": self.sign,
        }


@dataclass(frozen=True)
class PicardResult:
    u: GridFunction
    sweeps: int
    change: mpf
    converged: bool


@dataclass(frozen=True, eq=False)
class KernelFactors:
    """网格上的四个三角因子

    c = cos(λx), S = sin(q^{1/2}λx), C = cos(qλx), s = sin(q^{3/2}λx)
    """
    c: GridFunction
    S: GridFunction
    C: GridFunction
    s: GridFunction


def _lambda_exponent(lam: Argument, qp: QParam) -> int:
    """λ = q^{-K}，返回 K"""
    return -qp.grid_exponent(lam)


def kernel_factors(K: int, grid: QGrid) -> KernelFactors:
    with mp.workdps(grid_dps(grid, -K)):
        return KernelFactors(
            c=grid_eval_trig('cos', -K, grid),
            S=grid_eval_trig('sin', 0.5 - K, grid),
            C=grid_eval_trig('cos', 1 - K, grid),
            s=grid_eval_trig('sin', 1.5 - K, grid),
        )


def homogeneous_solution(a0: Real, b0: Real, lam: Argument, grid: QGrid) -> GridFunction:
    """a0 cos(λx;q^2) + b0 q^{-1/2} λ^{-1} sin(q^{1/2}λx;q^2)

    Raises:
        QDomainError: λ 不是正的网格点
    """
    qp = grid.qp
    K = _lambda_exponent(lam, qp)
    with mp.workdps(grid_dps(grid, -K)):
        r = 1 / (mp.sqrt(qp.base()) * qp.power(-K))
        cos_part = grid_eval_trig('cos', -K, grid)
        sin_part = grid_eval_trig('sin', 0.5 - K, grid)
        return cos_part * to_mpf(a0) + sin_part * (to_mpf(b0) * r)


def q_bracket(U: GridFunction, V: GridFunction, k: int) -> mpf:
    """[U,V]_q(x) = U(qx) D_q V(x) - V(qx) D_q U(x)，x = q^k"""
    with mp.workdps(max(U.dps, V.dps)):
        return U.at(k + 1) * q_derivative(V, k) - V.at(k + 1) * q_derivative(U, k)


def q_wronskian(u1: GridFunction, u2: GridFunction, k: int) -> Wronskian:
    qp = u1.grid.qp
    with mp.workdps(max(u1.dps, u2.dps)):
        value = q_bracket(u1, u2, k)
        x = qp.power(k)
        alt = (u1.at(k + 1) * u2.at(k) - u1.at(k) * u2.at(k + 1)) / ((1 - qp.base()) * x)
        return Wronskian(value, alt)


def wronskian_product_formula(a: GridFunction, W0: Real, k: int) -> mpf:
    """W(q^k) = W0 / ∏_{j=k}^{k_max} [1 + (1-q) q^j a(q^j)]

    Raises:
        QSingularityError: 某个因子为零
    """
    grid = a.grid
    grid.index(k)
    qp = grid.qp
    with mp.workdps(a.dps):
        q = qp.base()
        product = mpf(1)
        for j in range(k, grid.k_max + 1):
            factor = 1 + (1 - q) * qp.power(j) * a.at(j)
            if abs(factor) < PRODUCT_SINGULAR_TOL:
                raise QSingularityError("Wronskian 乘积因子为零", {"k": j, "factor": factor})
            product *= factor
        return to_mpf(W0) / product


def green_kernel(x: Argument, y: Argument, lam: Argument, qp: QParam) -> mpf:
    """G(x,y) = cos(qλy) sin(q^{1/2}λx) - sin(q^{3/2}λy) cos(λx)，x, y, λ 均为网格点"""
    kx, ky = qp.grid_exponent(x), qp.grid_exponent(y)
    K = _lambda_exponent(lam, qp)
    reports = (
        q_cos(QPoint(1 - K + ky), qp), q_sin(QPoint(0.5 - K + kx), qp),
        q_sin(QPoint(1.5 - K + ky), qp), q_cos(QPoint(-K + kx), qp),
    )
    with mp.workdps(max(r.dps for r in reports)):
        C, S, s, c = (r.value for r in reports)
        return C * S - s * c


def _check_same_grid(u: GridFunction, p: Potential) -> None:
    if u.grid != p.grid:
        raise QDomainError("解与位势不在同一网格上")


def _operator_term(u: GridFunction, p: Potential, k: int, below: Optional[mpf] = None) -> mpf:
    """p 对 L 的贡献：p(x)u(x) 或 p(x)u(qx)"""
    if p.coupling is Coupling.POINT:
        return p.p.at(k) * u.at(k)
    if k == u.grid.k_max:
        if below is None:
            raise QRangeError("shifted 耦合在 k_max 处需要 u(q^{k_max+1})", {"k": k})
        return p.p.at(k) * below
    return p.p.at(k) * u.at(k + 1)


def ode_residual(u: GridFunction, p: Potential, lam: Argument, k: int) -> mpf:
    """|D_q^2 u - (p 项) + λ^2 u(qx)| 在 x = q^k 处"""
    _check_same_grid(u, p)
    qp = u.grid.qp
    K = _lambda_exponent(lam, qp)
    with mp.workdps(max(u.dps, p.p.dps)):
        return abs(q_derivative2(u, k) - _operator_term(u, p, k) + qp.power(-2 * K) * u.at(k + 1))


def ode_residuals(sol: Solution, p: Potential) -> Dict[int, mpf]:
    """解在每个可计算网格点上的方程残差"""
    grid = sol.grid
    return {k: ode_residual(sol.u, p, sol.lam, k) for k in range(grid.k_min, grid.k_max - 1)}


def _l_operator(u: GridFunction, p: Potential, k: int) -> mpf:
    return q_derivative2(u, k) - _operator_term(u, p, k)


def green_formula_residual(U: GridFunction, V: GridFunction, p: Potential, k: int) -> mpf:
    """q-Green 公式残差

    D_q[U,V] = U(qx) L V - V(qx) L U + (1-q) x p [U,V]    (point)
    D_q[U,V] = U(qx) L V - V(qx) L U                      (shifted)
    """
    _check_same_grid(U, p)
    qp = U.grid.qp
    with mp.workdps(max(U.dps, V.dps, p.p.dps)):
        q = qp.base()
        x = qp.power(k)
        bracket = q_bracket(U, V, k)
        lhs = (bracket - q_bracket(U, V, k + 1)) / ((1 - q) * x)
        rhs = U.at(k + 1) * _l_operator(V, p, k) - V.at(k + 1) * _l_operator(U, p, k)
        if p.coupling is Coupling.POINT:
            rhs += (1 - q) * x * p.p.at(k) * bracket
        return abs(lhs - rhs)


class _VolterraSetup:
    """前向代换与 Picard 迭代共用的量"""

    def __init__(self, p: Potential, lam: Argument, bc: BoundaryParams):
        self.grid = p.grid
        self.qp = self.grid.qp
        self.K = _lambda_exponent(lam, self.qp)
        self.dps = grid_dps(self.grid, -self.K)
        with mp.workdps(self.dps):
            qp, K = self.qp, self.K
            self.q = qp.base()
            self.lam = qp.power(-K)
            self.r = 1 / (mp.sqrt(self.q) * self.lam)
            self.factors = kernel_factors(K, self.grid)
            self.a, self.b = bc.initial_data(qp)
            k_below = self.grid.k_max + 1
            self.below = (self.a * q_cos(QPoint(-K + k_below), qp).value
                          + self.b * self.r * q_sin(QPoint(0.5 - K + k_below), qp).value)
            kf = self.factors
            self.h = {k: self.a * kf.c.at(k) + self.b * self.r * kf.S.at(k)
                      for k in self.grid.exponents()}
            self.w = {k: (1 - self.q) * qp.power(k) for k in self.grid.exponents()}

    def sweep(self, source) -> Dict[int, mpf]:
        """用给定的 f(t) 计算 h + ∫_0^x K(x,t) f(t) d_q t（含 t = x 项）"""
        kf = self.factors
        A = B = mpf(0)
        out = {}
        for k in range(self.grid.k_max, self.grid.k_min - 1, -1):
            f = source(k)
            A += self.w[k] * kf.C.at(k) * f
            B += self.w[k] * self.r * kf.s.at(k) * f
            out[k] = self.h[k] + self.r * kf.S.at(k) * A - kf.c.at(k) * B
        return out


def solve(p: Potential, lam: Argument, bc: BoundaryParams,
          pivot_tol: float = DEFAULT_PIVOT_TOL) -> Solution:
    """前向代换求解离散 Volterra 方程

    φ(x) = h(x) + ∫_0^x K(x,t) f(t) d_q t，f = pφ（point）或 p φ(q·)（shifted）。
    x = q^k 按 k 递减处理，t = x 这一项对未知量是线性的。

    Raises:
        QDomainError: λ 不是网格点
        QSingularityError: point 耦合的主元 |1 - (1-q)^2 x^2 p| < pivot_tol
    """
    setup = _VolterraSetup(p, lam, bc)
    grid, K = setup.grid, setup.K
    with mp.workdps(setup.dps):
        kf = setup.factors
        r = setup.r
        A = B = mpf(0)
        prev = setup.below
        pivots = []
        values = {}
        for k in range(grid.k_max, grid.k_min - 1, -1):
            w = setup.w[k]
            c_k, S_k, C_k, s_k = kf.c.at(k), kf.S.at(k), kf.C.at(k), kf.s.at(k)
            p_k = p.p.at(k)
            known = setup.h[k] + r * S_k * A - c_k * B
            if p.coupling is Coupling.SHIFTED:
                f = p_k * prev
                phi = known + w * f * r * (S_k * C_k - c_k * s_k)
            else:
                pivot = 1 - w * p_k * r * (S_k * C_k - c_k * s_k)
                if abs(pivot) < pivot_tol:
                    raise QSingularityError("前向代换主元接近零",
                                            {"k": k, "K": K, "pivot": pivot})
                pivots.append(pivot)
                phi = known / pivot
                f = p_k * phi
            A += w * C_k * f
            B += w * r * s_k * f
            values[k] = phi
            prev = phi

        u = GridFunction(grid, [values[k] for k in grid.exponents()])
        lam_sq = setup.lam ** 2
        residuals = [abs(q_derivative2(u, k) - _operator_term(u, p, k) + lam_sq * u.at(k + 1))
                     for k in range(grid.k_min, grid.k_max - 1)]
        res_max = max(residuals, default=mpf(0))
        scale = lam_sq * u.sup_norm()
        res_rel = res_max / scale if scale != 0 else res_max
        bracket = mp.fprod(pivots) if pivots else mpf(1)

    logger.debug(f"K={K} 求解完成，{len(grid)} 个网格点，精度 {setup.dps} 位，"
                 f"相对残差 {float(res_rel):.3e}")
    return Solution(u=u, K=K, bc=bc, coupling=p.coupling, ode_residual_max=res_max,
                    ode_residual_rel=res_rel, bracket_factor=bracket,
                    support=p.support(SUPPORT_REL_TOL), dps=setup.dps, below=setup.below)


def picard_solve(p: Potential, lam: Argument, bc: BoundaryParams,
                 max_sweeps: int = DEFAULT_PICARD_SWEEPS,
                 tol: float = DEFAULT_PICARD_TOL) -> PicardResult:
    """从齐次解出发对同一 Volterra 映射做不动点迭代（校验用）"""
    setup = _VolterraSetup(p, lam, bc)
    grid = setup.grid
    with mp.workdps(setup.dps):
        current = dict(setup.h)
        change = mp.inf
        sweeps = 0
        while sweeps < max_sweeps:
            old = current
            if p.coupling is Coupling.POINT:
                def source(k):
                    return p.p.at(k) * old[k]
            else:
                def source(k):
                    return p.p.at(k) * (old[k + 1] if k < grid.k_max else setup.below)
            current = setup.sweep(source)
            sweeps += 1
            scale = max(abs(v) for v in current.values())
            diff = max(abs(current[k] - old[k]) for k in current)
            change = diff / scale if scale != 0 else diff
            if change < tol:
                break
        u = GridFunction(grid, [current[k] for k in grid.exponents()])
    converged = change < tol
    if not converged:
        logger.warning(f"Picard 迭代 {sweeps} 次后未收敛，相对变化 {float(change):.3e}")
    return PicardResult(u=u, sweeps=sweeps, change=change, converged=converged)


def gronwall_certify(f: GridFunction, C: Real, g: Union[GridFunction, Real],
                     slack: float = 1e-12) -> GronwallReport:
    """q-Gronwall 证书

    前提   f(x) <= C + ∫_0^x f g d_q t
    结论   f(x) <= C / ∏_{j=k}^{k_max} (1 - (1-q) q^j g(q^j))

    结论只在有效前缀上检查。前提不成立是报告数据而不是异常。

    Raises:
        QDomainError: f 或 g 为负
    """
    grid = f.grid
    qp = grid.qp
    constant_g = not isinstance(g, GridFunction)
    g_fn = GridFunction.constant(grid, g) if constant_g else g
    if g_fn.grid != grid:
        raise QDomainError("f 与 g 不在同一网格上")
    if any(v < 0 for v in f.values) or any(v < 0 for v in g_fn.values):
        raise QDomainError("Gronwall 证书要求 f, g >= 0")

    C = to_mpf(C)
    points = []
    printed = {}
    violations = 0
    valid_to = None
    passed = True
    with mp.workdps(max(f.dps, g_fn.dps)):
        q = qp.base()
        eps = to_mpf(slack)
        integral = mpf(0)
        product = mpf(1)
        in_domain = True
        valid = True
        for k in range(grid.k_max, grid.k_min - 1, -1):
            w = (1 - q) * qp.power(k)
            f_k, g_k = f.at(k), g_fn.at(k)
            integral += w * f_k * g_k
            hypothesis_ok = f_k <= (C + integral) * (1 + eps)
            if not hypothesis_ok:
                violations += 1
            factor = 1 - w * g_k
            in_domain = in_domain and factor > 0
            bound = margin = None
            if in_domain:
                product *= factor
                bound = C / product
                margin = bound - f_k
            valid = valid and hypothesis_ok and in_domain
            certified = valid and margin >= -eps * bound
            if valid:
                valid_to = k
                passed = passed and certified
            if constant_g and in_domain:
                try:
                    printed[k] = C * q_exp_e((1 - q) * g_k * qp.power(k), qp, base_power=2)
                except QPoleError:
                    logger.debug(f"k={k} 处印刷界进入极点区域")
            points.append(GronwallPoint(k, f_k, bound, margin, hypothesis_ok,
                                        in_domain, valid, certified))
    if violations:
        logger.warning(f"Gronwall 前提在 {violations} 个点不成立，有效前缀止于 k={valid_to}")
    return GronwallReport(points=tuple(points), valid_to=valid_to, passed=passed,
                          hypothesis_violations=violations, printed_bounds=printed)


def certify_solution(sol: Solution, p: Potential) -> GronwallReport:
    """以 A_λ = (|a| + q^{-1/2}|b|/λ)B、C_λ = 2 q^{-1/2} B^2 ‖p‖∞ / λ 对 |φ| 做证书"""
    _check_same_grid(sol.u, p)
    qp = sol.grid.qp
    with mp.workdps(sol.dps):
        q = qp.base()
        bound = qp.cos_sin_bound
        a, b = sol.bc.initial_data(qp)
        lam = sol.lam
        A = (abs(a) + abs(b) / (mp.sqrt(q) * lam)) * bound
        C = 2 * bound ** 2 * p.norm_inf / (mp.sqrt(q) * lam)
        return gronwall_certify(sol.u.abs(), A, C)


def _coefficient_slot(bc: BoundaryParams, first: mpf, second: mpf) -> Dict[str, mpf]:
    if Problem(bc.problem) is Problem.E1:
        return {"mu": first, "nu": second}
    return {"mu1": first, "nu1": second}


def coeffs_integral(sol: Solution, p: Potential) -> AsymCoeffs:
    """μ = a - q^{-1/2}λ^{-1} ∫ sin(q^{3/2}λy) f,  ν = λ^{-1}(b + ∫ cos(qλy) f)"""
    _check_same_grid(sol.u, p)
    if sol.coupling is not p.coupling:
        raise QDomainError("解与位势的耦合方式不一致",
                           {"solution": sol.coupling.value, "potential": p.coupling.value})
    grid = sol.grid
    qp = grid.qp
    with mp.workdps(sol.dps):
        kf = kernel_factors(sol.K, grid)
        q = qp.base()
        lam = sol.lam
        r = 1 / (mp.sqrt(q) * lam)
        a, b = sol.bc.initial_data(qp)
        weights = grid.weights()
        terms_C, terms_s = [], []
        for i, k in enumerate(grid.exponents()):
            f = _operator_term(sol.u, p, k, sol.below)
            terms_C.append(weights[i] * kf.C.at(k) * f)
            terms_s.append(weights[i] * kf.s.at(k) * f)
        first = a - r * mp.fsum(terms_s)
        second = (b + mp.fsum(terms_C)) / lam
    return AsymCoeffs(K=sol.K, method="integral", qp=qp, dps=sol.dps,
                      bracket_factor=sol.bracket_factor,
                      **_coefficient_slot(sol.bc, first, second))


def default_fit_window(sol: Solution) -> Tuple[int, int]:
    """支撑左侧的 MIN_FIT_POINTS 个点"""
    grid = sol.grid
    k_hi = sol.support[0] - 1 if sol.support else grid.k_min + MIN_FIT_POINTS - 1
    return max(grid.k_min, k_hi - MIN_FIT_POINTS + 1), k_hi


def coeffs_fitted(sol: Solution, window: Optional[Tuple[int, int]] = None,
                  fit_tol: float = DEFAULT_FIT_TOL) -> AsymCoeffs:
    """在支撑之外的窗口上把 φ 投影到 cos(λx) 与 q^{-1/2} sin(q^{1/2}λx)

    Raises:
        QDomainError: 窗口点数不足或与支撑重叠
        QConditioningError: 法方程病态
        QEvaluationError: 拟合残差超过 fit_tol
    """
    grid = sol.grid
    qp = grid.qp
    k_lo, k_hi = window if window is not None else default_fit_window(sol)
    if k_hi - k_lo + 1 < MIN_FIT_POINTS:
        raise QDomainError("拟合窗口至少需要 8 个网格点", {"window": (k_lo, k_hi)})
    grid.index(k_lo)
    grid.index(k_hi)
    if sol.support is not None and k_hi >= sol.support[0]:
        raise QDomainError("拟合窗口必须位于位势支撑之外",
                           {"window": (k_lo, k_hi), "support": sol.support})

    with mp.workdps(sol.dps):
        sub = grid.sub(k_lo, k_hi)
        q = qp.base()
        basis_cos = grid_eval_trig('cos', -sol.K, sub).values
        basis_sin = grid_eval_trig('sin', 0.5 - sol.K, sub).values / mp.sqrt(q)
        y = sol.u.restrict(k_lo, k_hi).values

        norm_cos = mp.sqrt(mp.fsum(basis_cos * basis_cos))
        norm_sin = mp.sqrt(mp.fsum(basis_sin * basis_sin))
        col_cos, col_sin = basis_cos / norm_cos, basis_sin / norm_sin
        rho = mp.fsum(col_cos * col_sin)
        cond = (1 + abs(rho)) / (1 - abs(rho)) if abs(rho) < 1 else mp.inf
        if cond > mpf(10) ** (sol.dps / 2):
            raise QConditioningError("法方程病态", {"window": (k_lo, k_hi), "cond": cond})

        normal = mp.matrix([[1, rho], [rho, 1]])
        rhs = mp.matrix([mp.fsum(col_cos * y), mp.fsum(col_sin * y)])
        coef = mp.lu_solve(normal, rhs)
        first, second = coef[0] / norm_cos, coef[1] / norm_sin

        resid = y - first * basis_cos - second * basis_sin
        scale = mp.sqrt(mp.fsum(y * y))
        fit_residual = mp.sqrt(mp.fsum(resid * resid)) / scale if scale != 0 else mpf(0)

    if fit_residual > fit_tol:
        raise QEvaluationError("拟合残差超过容差",
                               {"window": (k_lo, k_hi), "residual": fit_residual,
                                "fit_tol": fit_tol})
    return AsymCoeffs(K=sol.K, method="fitted", qp=qp, dps=sol.dps,
                      fit_residual=fit_residual, bracket_factor=sol.bracket_factor,
                      **_coefficient_slot(sol.bc, first, second))


def main_identity_report(cE1: AsymCoeffs, cE2: AsymCoeffs) -> MainIdentityReport:
    """μν1 - νμ1 对比 -q^{1/2}/(λΠ_p)

    Raises:
        QDomainError: λ 不同、系数缺失或位势不一致
    """
    if cE1.K != cE2.K:
        raise QDomainError("两组系数的 λ 不同", {"K": (cE1.K, cE2.K)})
    if cE1.mu is None or cE1.nu is None or cE2.mu1 is None or cE2.nu1 is None:
        raise QDomainError("需要 E1 的 (μ, ν) 与 E2 的 (μ1, ν1)")
    qp = cE1.qp
    with mp.workdps(max(cE1.dps, cE2.dps)):
        if abs(cE1.bracket_factor - cE2.bracket_factor) > 1e-12 * abs(cE1.bracket_factor):
            raise QDomainError("两组系数来自不同的位势",
                               {"bracket_factor": (cE1.bracket_factor, cE2.bracket_factor)})
        sqrt_q = mp.sqrt(qp.base())
        lam = qp.power(-cE1.K)
        value = cE1.mu * cE2.nu1 - cE1.nu * cE2.mu1
        target = -sqrt_q / (lam * cE1.bracket_factor)
        printed_target = 1 / (sqrt_q * lam)
        residual = abs(value - target) / abs(target)
        printed_ratio = abs(value) * sqrt_q * lam
        sign = 1 if value >= 0 else -1
    return MainIdentityReport(value, target, printed_target, residual, printed_ratio, sign)


def main_identity_residual(cE1: AsymCoeffs, cE2: AsymCoeffs) -> mpf:
    return main_identity_report(cE1, cE2).residual


@dataclass(frozen=True)
class BracketPoint:
    k: int
    value: mpf
    expected: mpf

    @property
    def residual(self) -> mpf:
        return abs(self.value - self.expected)


def bracket_profile(phi: Solution, theta: Solution, p: Potential) -> List[BracketPoint]:
    """[φ,θ]_q(q^k) 与 W0/∏_{j>=k}(1 - (1-q)^2 q^{2j} p_j) 的比较，W0 = a b1 - b a1"""
    if phi.K != theta.K:
        raise QDomainError("两个解的 λ 不同", {"K": (phi.K, theta.K)})
    _check_same_grid(phi.u, p)
    _check_same_grid(theta.u, p)
    qp = p.grid.qp
    with mp.workdps(max(phi.dps, theta.dps)):
        a, b = phi.bc.initial_data(qp)
        a1, b1 = theta.bc.initial_data(qp)
        W0 = a * b1 - b * a1
        coefficient = p.first_order_coefficient()
        return [BracketPoint(k, q_bracket(phi.u, theta.u, k),
                             wronskian_product_formula(coefficient, W0, k))
                for k in range(p.grid.k_min, p.grid.k_max)]
