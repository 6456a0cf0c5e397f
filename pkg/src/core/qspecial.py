"""q-特殊函数模块

q-余弦、q-正弦、两个 q-指数函数、归一化 q-Bessel 函数 j_α 与
Hahn-Exton 函数 J_α 的标量求值，以及基于三项递推的网格求值。

偶级数统一写成
    Σ (-1)^n a_n z^{2n},  a_{n+1}/a_n = q^{2n}(1-q)^2 / ((1-q^{2n+2})(1-q^{2n+2+s}))
其中 s = -1 给出 cos(x;q^2)，s = 1 给出 sin(x;q^2)/x，s = 2α 给出 j_α(x;q^2)。
"""

import math
import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

from mpmath import mp, mpf

from src.core.errors import QDomainError, QEvaluationError, QPoleError, QRangeError
from src.core.qcore import (
    INF, Argument, GridFunction, QGrid, QParam, QPoint,
    json_real, q_gamma, q_pochhammer, to_mpf,
)

logger = logging.getLogger('qspecial')

MAX_SERIES_TERMS = 1_000_000

SHIFT_COS = -1.0
SHIFT_SIN = 1.0


@dataclass(frozen=True)
class TrigCoeff:
    """q-cos / q-sin 的级数系数 b_n, c_n"""
    n: int
    b_n: mpf
    c_n: mpf


@dataclass(frozen=True)
class EvalReport:
    """标量求值结果及抵消见证"""
    value: mpf
    n_terms: int
    max_term: mpf
    method: str
    dps: int

    @property
    def condition(self) -> mpf:
        if self.max_term == 0:
            return mpf(1)
        if self.value == 0:
            return mp.inf
        return self.max_term / abs(self.value)

    @property
    def trusted(self) -> bool:
        cond = self.condition
        if mp.isinf(cond):
            return False
        return float(mp.log10(cond)) <= self.dps - 10

    def to_dict(self) -> dict:
        return {
            "value": json_real(self.value),
            "n_terms": self.n_terms,
            "max_term": json_real(self.max_term),
            "condition": json_real(self.condition) if not mp.isinf(self.condition) else "inf",
            "method": self.method,
            "dps": self.dps,
            "trusted": self.trusted,
        }


def trig_coefficients(n_max: int, qp: QParam) -> List[TrigCoeff]:
    """前 n_max+1 个系数，按比值递推生成"""
    q = qp.base()
    b, c = mpf(1), mpf(1)
    coeffs = [TrigCoeff(0, b, c)]
    for n in range(n_max):
        b *= q ** (2 * n) * (1 - q) ** 2 / ((1 - q ** (2 * n + 1)) * (1 - q ** (2 * n + 2)))
        c *= q ** (2 * n) * (1 - q) ** 2 / ((1 - q ** (2 * n + 2)) * (1 - q ** (2 * n + 3)))
        coeffs.append(TrigCoeff(n + 1, b, c))
    return coeffs


def _log_ratio_even(qf: float, shift: float) -> Callable[[int], float]:
    log_q = math.log10(qf)
    log_one_minus = 2 * math.log10(1 - qf)

    def log_ratio(n: int) -> float:
        return (2 * n * log_q + log_one_minus
                - math.log10(1 - qf ** (2 * n + 2)) - math.log10(1 - qf ** (2 * n + 2 + shift)))
    return log_ratio


def _ratio_even(q: mpf, shift: float) -> Callable[[int], mpf]:
    one_minus_sq = (1 - q) ** 2
    shift = to_mpf(shift)

    def ratio(n: int) -> mpf:
        denominator = (1 - q ** (2 * n + 2)) * (1 - q ** (2 * n + 2 + shift))
        return q ** (2 * n) * one_minus_sq / denominator
    return ratio


def _series_peak(log10_z2: float, log_ratio: Callable[[int], float]) -> float:
    """log10 of the largest |term| of Σ (-1)^n a_n z2^n with a_0 = 1"""
    log_term, peak, n = 0.0, 0.0, 0
    while n < MAX_SERIES_TERMS:
        step = log10_z2 + log_ratio(n)
        if step <= 0:
            break
        log_term += step
        peak = max(peak, log_term)
        n += 1
    return peak


def _alternating_series(z2: mpf, ratio: Callable[[int], mpf]) -> Tuple[mpf, int, mpf]:
    """Σ (-1)^n a_n z2^n；转折点之后连续三项小于 10^-(dps+3)·|部分和| 时停止"""
    term = mpf(1)
    total = term
    peak = abs(term)
    eps = mpf(10) ** (-(mp.dps + 3))
    small = 0
    n = 0
    while True:
        r = ratio(n) * z2
        term = -term * r
        total += term
        n += 1
        peak = max(peak, abs(term))
        if term == 0:
            break
        if r < 1 and abs(term) <= eps * abs(total):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        if n > MAX_SERIES_TERMS:
            raise QEvaluationError("级数未收敛", {"terms": n})
    return total, n + 1, peak


def _even_series(x: Argument, qp: QParam, shift: float, odd: bool) -> EvalReport:
    """自适应精度求偶级数；odd 时结果乘以 x"""
    log10_x = qp.log10_abs(x)
    if log10_x == -INF:
        value = mpf(0) if odd else mpf(1)
        return EvalReport(value, 1, abs(value), qp.method_for(mp.dps), mp.dps)

    peak = _series_peak(2 * log10_x, _log_ratio_even(qp.q, shift))
    dps = qp.working_dps(peak)
    while True:
        with mp.workdps(dps):
            xv = qp.resolve(x)
            total, n_terms, peak_mp = _alternating_series(xv * xv, _ratio_even(qp.base(), shift))
            value = xv * total if odd else total
            max_term = abs(xv) * peak_mp if odd else peak_mp
        if total == 0:
            break
        cond_digits = float(mp.log10(peak_mp / abs(total)))
        needed = qp.working_dps(0.0, cond_digits)
        if needed <= dps:
            break
        logger.debug(f"抵消放大 10^{cond_digits:.1f}，精度提升到 {needed} 位")
        dps = needed
    return EvalReport(value, n_terms, max_term, qp.method_for(dps), dps)


def q_cos(x: Argument, qp: QParam) -> EvalReport:
    """cos(x;q^2) = Σ (-1)^n b_n x^{2n}"""
    return _even_series(x, qp, SHIFT_COS, odd=False)


def q_sin(x: Argument, qp: QParam) -> EvalReport:
    """sin(x;q^2) = Σ (-1)^n c_n x^{2n+1}"""
    return _even_series(x, qp, SHIFT_SIN, odd=True)


def j_alpha(x: Argument, alpha: float, qp: QParam) -> EvalReport:
    """归一化 q-Bessel 函数 j_α(x;q^2)，即 1φ1(0;q^{2α+2};q^2;(1-q)^2 x^2)

    Raises:
        QDomainError: alpha <= -1
    """
    if alpha <= -1:
        raise QDomainError("j_alpha 要求 alpha > -1", {"alpha": alpha})
    return _even_series(x, qp, 2 * alpha, odd=False)


def q_exp_E(x: Argument, qp: QParam, base_power: int = 1) -> mpf:
    """E(x;Q) = (-(1-Q)x;Q)_inf，Q = q^base_power"""
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        Q = qp.power(base_power)
        return q_pochhammer(-(1 - Q) * qp.resolve(x), Q, INF, qp.prod_tol)


def q_exp_e(x: Argument, qp: QParam, base_power: int = 1) -> mpf:
    """e(x;Q) = 1/((1-Q)x;Q)_inf

    Raises:
        QPoleError: x >= 1/(1-Q)（极点 q^{-m}/(1-Q) 所在区域）
    """
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        Q = qp.power(base_power)
        xv = qp.resolve(x)
        if (1 - Q) * xv >= 1:
            raise QPoleError("e(x;q) 在 x >= 1/(1-q) 处进入极点区域",
                             {"x": xv, "pole": 1 / (1 - Q)})
        return 1 / q_pochhammer((1 - Q) * xv, Q, INF, qp.prod_tol)


def hahn_exton_J(z: Argument, alpha: float, qp: QParam, base_power: int = 1) -> mpf:
    """Hahn-Exton q-Bessel 函数 J_α(z;Q)

    J_α(z;Q) = (z/(1-Q))^α / Γ_Q(α+1) · Σ (-1)^k Q^{k(k+1)/2} z^{2k} / ((Q;Q)_k (Q^{α+1};Q)_k)

    Raises:
        QDomainError: alpha <= -1，或 z < 0 且 alpha 非整数，或 z = 0 且 alpha < 0
    """
    if alpha <= -1:
        raise QDomainError("hahn_exton_J 要求 alpha > -1", {"alpha": alpha})
    integer_alpha = float(alpha).is_integer()
    log10_z = qp.log10_abs(z)
    if log10_z == -INF:
        if alpha > 0:
            return mpf(0)
        if alpha == 0:
            return mpf(1)
        raise QDomainError("J_alpha(0) 在 alpha < 0 时无界", {"alpha": alpha})

    Qf = qp.q ** base_power

    def log_ratio(k: int) -> float:
        return ((k + 1) * math.log10(Qf) - math.log10(1 - Qf ** (k + 1))
                - math.log10(1 - Qf ** (alpha + k + 1)))

    peak = _series_peak(2 * log10_z, log_ratio)
    with mp.workdps(qp.working_dps(peak)):
        Q = qp.power(base_power)
        zv = qp.resolve(z)
        if zv < 0 and not integer_alpha:
            raise QDomainError("z < 0 时 alpha 必须为整数", {"z": zv, "alpha": alpha})
        a1 = Q ** (to_mpf(alpha) + 1)

        def ratio(k: int) -> mpf:
            return Q ** (k + 1) / ((1 - Q ** (k + 1)) * (1 - a1 * Q ** k))

        total, _, _ = _alternating_series(zv * zv, ratio)
        w = zv / (1 - Q)
        prefactor = w ** int(alpha) if integer_alpha else w ** to_mpf(alpha)
        return prefactor * total / q_gamma(to_mpf(alpha) + 1, qp, base_power)


def grid_dps(grid: QGrid, lam_exp: float, shift: float = SHIFT_COS) -> int:
    """网格递推所需的工作精度

    最大自变量 q^{lam_exp + k_min} 处的抵消量，加上从 x = q^{k_max}
    起步时种子误差按 1/x_min 放大的位数。
    """
    qp = grid.qp
    log10_x = (lam_exp + grid.k_min) * math.log10(qp.q)
    peak = _series_peak(2 * log10_x, _log_ratio_even(qp.q, shift))
    extra = max(grid.k_max, 0) * -math.log10(qp.q)
    return qp.working_dps(peak, extra)


def _march(grid: QGrid, seed: Callable[[int], mpf],
           step: Callable[[int, mpf, mpf], mpf]) -> GridFunction:
    if len(grid) < 2:
        raise QRangeError("网格点不足以启动递推", {"points": len(grid)})
    values = {grid.k_max: seed(grid.k_max), grid.k_max - 1: seed(grid.k_max - 1)}
    for k in range(grid.k_max - 2, grid.k_min - 1, -1):
        values[k] = step(k, values[k + 1], values[k + 2])
    return GridFunction(grid, [values[k] for k in grid.exponents()])


def grid_eval_trig(kind: str, lam_exp: float, grid: QGrid) -> GridFunction:
    """在整个网格上求 cos(λx;q^2) 或 sin(λx;q^2)，λ = q^{lam_exp}

    最小的两个点用级数求值，然后由
        f(x) = [(1+q) f(qx) - f(q^2 x) - κ q (1-q)^2 x^2 f(qx)] / q
    向外递推；κ = λ^2 (cos) 或 λ^2/q (sin)。

    Raises:
        QDomainError: kind 不是 cos / sin
        QRangeError: 网格少于两个点
    """
    if kind not in ("cos", "sin"):
        raise QDomainError("kind 必须是 cos 或 sin", {"kind": kind})
    qp = grid.qp
    evaluator = q_cos if kind == "cos" else q_sin
    shift = SHIFT_COS if kind == "cos" else SHIFT_SIN
    with mp.workdps(grid_dps(grid, lam_exp, shift)):
        q = qp.base()
        lam_sq = qp.power(2 * lam_exp)
        kappa = lam_sq if kind == "cos" else lam_sq / q
        c = kappa * q * (1 - q) ** 2

        def seed(k: int) -> mpf:
            return evaluator(QPoint(lam_exp + k), qp).value

        def step(k: int, f1: mpf, f2: mpf) -> mpf:
            return ((1 + q - c * qp.power(2 * k)) * f1 - f2) / q

        return _march(grid, seed, step)


def grid_eval_bessel(alpha: float, lam_exp: float, grid: QGrid) -> GridFunction:
    """在整个网格上求 j_α(λx;q^2)，λ = q^{lam_exp}

    由 Δ_{q,α} y + λ^2 y = 0 得
        f_k = f_{k+1} + q^{2α}(f_{k+1} - f_{k+2}) - λ^2 (1-q)^2 q^{2k} f_{k+1}
    """
    if alpha <= -1:
        raise QDomainError("j_alpha 要求 alpha > -1", {"alpha": alpha})
    qp = grid.qp
    with mp.workdps(grid_dps(grid, lam_exp, 2 * alpha)):
        q = qp.base()
        q_2a = q ** (2 * to_mpf(alpha))
        c = qp.power(2 * lam_exp) * (1 - q) ** 2

        def seed(k: int) -> mpf:
            return j_alpha(QPoint(lam_exp + k), alpha, qp).value

        def step(k: int, f1: mpf, f2: mpf) -> mpf:
            return f1 + q_2a * (f1 - f2) - c * qp.power(2 * k) * f1

        return _march(grid, seed, step)
