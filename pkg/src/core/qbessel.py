"""q-Bessel 模块

q-Bessel 算子 Δ_{q,α}、j_α 的渐近分解 j_α = cos(q^{-α-1/2}·) + R 及余项界、
Weber 积分与 q-热核，以及用 Ramanujan 1ψ1 求和闭式给出的 B_α(t)。

网格记号：x = q^n，λ = q^{-K}；λx = q^{n-K} 仍是网格点。
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

from mpmath import mp, mpf

from src.core.errors import QDivergenceError, QDomainError, QHypothesisError, QPoleError
from src.core.qcore import (
    DEFAULT_N_NEG_MAX, INF, Argument, GridFunction, QGrid, QParam, QPoint,
    format_real, json_real, jackson_0_to_inf, q_derivative, q_derivative2, q_pochhammer, to_mpf,
)
from src.core.qspecial import grid_dps, j_alpha, q_cos, q_exp_e

logger = logging.getLogger('qbessel')

BOUND_SLACK = 1.1


@dataclass(frozen=True)
class DeltaForms:
    """Δ_{q,α} f 的两种写法"""
    first: mpf
    second: mpf

    @property
    def discrepancy(self) -> mpf:
        scale = max(abs(self.first), abs(self.second))
        return abs(self.first - self.second) / scale if scale != 0 else mpf(0)


@dataclass(frozen=True)
class BesselAsymReport:
    alpha: float
    K: int
    j: int
    lam: mpf
    x: mpf
    j_alpha: mpf
    principal: mpf
    remainder: mpf
    bound: mpf
    C_q: mpf
    C_q_chain: mpf
    principal_on_lattice: bool

    @property
    def within_bound(self) -> bool:
        return abs(self.remainder) <= BOUND_SLACK * self.bound

    def to_row(self) -> List[Any]:
        """alpha,K,lambda,x,j_alpha,principal,remainder,bound"""
        return [format_real(self.alpha), self.K, format_real(self.lam), format_real(self.x),
                format_real(self.j_alpha), format_real(self.principal),
                format_real(self.remainder), format_real(self.bound)]


@dataclass(frozen=True)
class WeberReport:
    lhs: mpf
    rhs: mpf
    M0: mpf
    residual: mpf


@dataclass(frozen=True)
class HeatKernelRecord:
    """q-热核 E_α(t,λ) 的数值与闭式；主项积分离格时为 None"""
    alpha: float
    t: mpf
    lam: mpf
    A_alpha: mpf
    E_value: mpf
    lhs_integral: mpf
    principal_integral: Optional[mpf]
    theta: Optional[mpf]
    theta_bound: Optional[mpf]
    residual: mpf

    def to_dict(self) -> Dict[str, Any]:
        fmt = json_real
        return {
            "alpha": self.alpha, "t": fmt(self.t), "lambda": fmt(self.lam),
            "A_alpha": fmt(self.A_alpha), "E_value": fmt(self.E_value),
            "lhs_integral": fmt(self.lhs_integral),
            "principal_integral": fmt(self.principal_integral),
            "theta": fmt(self.theta), "theta_bound": fmt(self.theta_bound),
            "residual": fmt(self.residual),
        }


def delta_q_alpha(f: GridFunction, alpha: float, k: int) -> DeltaForms:
    """Δ_{q,α} f(x)，x = q^k，t = q^{-1}x = q^{k-1}

    first:  t^{-(2α+1)} D_q[s^{2α+1} D_q f](t)
    second: q^{2α+1} D_q^2 f(t) + (1-q^{2α+1}) D_q f(t) / ((1-q) t)

    Raises:
        QRangeError: k-1 或 k+1 不在网格内
    """
    grid = f.grid
    qp = grid.qp
    grid.index(k - 1)
    grid.index(k + 1)
    with mp.workdps(f.dps):
        q = qp.base()
        e = 2 * to_mpf(alpha) + 1
        t = qp.power(k - 1)
        q_e = q ** e
        df_t, df_qt = q_derivative(f, k - 1), q_derivative(f, k)
        g_t = t ** e * df_t
        g_qt = (q * t) ** e * df_qt
        first = (g_t - g_qt) / ((1 - q) * t) / t ** e
        second = q_e * q_derivative2(f, k - 1) + (1 - q_e) * df_t / ((1 - q) * t)
        return DeltaForms(first, second)


def bessel_grid_values(alpha: float, lam_exp: float, grid: QGrid) -> GridFunction:
    """逐点用级数求 j_α(q^{lam_exp} x)，与网格递推相互独立"""
    return GridFunction(grid, [j_alpha(QPoint(lam_exp + k), alpha, grid.qp).value
                               for k in grid.exponents()])


def bessel_ode_residual(alpha: float, lam: Argument, grid: QGrid) -> mpf:
    """max |Δ_{q,α} y + λ^2 y| / (λ^2 max|y|)，y = j_α(λx)"""
    qp = grid.qp
    K = -qp.grid_exponent(lam)
    f = bessel_grid_values(alpha, -K, grid)
    with mp.workdps(f.dps):
        lam_sq = qp.power(-2 * K)
        residuals = [abs(delta_q_alpha(f, alpha, k).second + lam_sq * f.at(k))
                     for k in range(grid.k_min + 1, grid.k_max)]
        return max(residuals) / (lam_sq * f.sup_norm())


def bessel_basis_wronskian(alpha: float, lam: Argument, grid: QGrid) -> List[mpf]:
    """V(x) = x^{2α+1}(y1 D_q y2 - y2 D_q y1)，对方程的任意两解在网格上为常数

    y1 = j_α(λx)，y2 由同一递推从种子 y2(q^{k_max}) = 0, y2(q^{k_max-1}) = 1 出发。
    """
    qp = grid.qp
    K = -qp.grid_exponent(lam)
    y1 = bessel_grid_values(alpha, -K, grid)
    with mp.workdps(max(y1.dps, grid_dps(grid, -K, 2 * alpha))):
        q = qp.base()
        q_2a = q ** (2 * to_mpf(alpha))
        c = qp.power(-2 * K) * (1 - q) ** 2
        values = {grid.k_max: mpf(0), grid.k_max - 1: mpf(1)}
        for k in range(grid.k_max - 2, grid.k_min - 1, -1):
            f1, f2 = values[k + 1], values[k + 2]
            values[k] = f1 + q_2a * (f1 - f2) - c * qp.power(2 * k) * f1
        y2 = GridFunction(grid, [values[k] for k in grid.exponents()])
        e = 2 * to_mpf(alpha) + 1
        return [qp.power(k) ** e * (y1.at(k) * q_derivative(y2, k) - y2.at(k) * q_derivative(y1, k))
                for k in range(grid.k_min, grid.k_max)]


def remainder_constants(alpha: float, qp: QParam) -> Tuple[mpf, mpf]:
    """(C_q, C_q_chain)

    C_q       = ((1-q^{2α+1})/q) · 2 / ((1-q)(q;q^2)_∞^2)
    C_q_chain = (1-q^{2α+1}) / (1-q)^2 · (2/(q;q^2)_∞^2)^2
    """
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        q = qp.base()
        bound = qp.cos_sin_bound
        factor = 1 - q ** (2 * to_mpf(alpha) + 1)
        return factor / q * 2 * bound / (1 - q), factor / (1 - q) ** 2 * (2 * bound) ** 2


def principal_on_lattice(alpha: float, qp: QParam) -> bool:
    """cos(q^{-α-1/2} λx) 落在格点上当且仅当 α+1/2 ∈ Z 且 q 为结构性底数"""
    return float(alpha + 0.5).is_integer() and qp.is_structural


def bessel_remainder(x: Argument, lam: Argument, alpha: float, qp: QParam) -> BesselAsymReport:
    """R_{q,α}(x,λ^2) = j_α(λx) - cos(q^{-α-1/2}λx) 及其界 C_q/(λx)

    Raises:
        QHypothesisError: alpha <= -1/2
        QDomainError: x 或 λ 不是网格点
    """
    if alpha <= -0.5:
        raise QHypothesisError("余项估计要求 alpha > -1/2", {"alpha": alpha})
    j = qp.grid_exponent(x)
    K = -qp.grid_exponent(lam)
    bessel = j_alpha(QPoint(j - K), alpha, qp)
    principal = q_cos(QPoint(j - K - alpha - 0.5), qp)
    on_lattice = principal_on_lattice(alpha, qp)
    if not on_lattice:
        logger.warning(f"alpha={alpha} 的主项 cos(q^(-alpha-1/2) λx) 不在格点上，不断言衰减")
    with mp.workdps(max(bessel.dps, principal.dps)):
        C_q, C_q_chain = remainder_constants(alpha, qp)
        lam_x = qp.power(j - K)
        return BesselAsymReport(
            alpha=alpha, K=K, j=j, lam=qp.power(-K), x=qp.power(j),
            j_alpha=bessel.value, principal=principal.value,
            remainder=bessel.value - principal.value,
            bound=C_q / lam_x, C_q=C_q, C_q_chain=C_q_chain,
            principal_on_lattice=on_lattice,
        )


def _lattice_sum(term: Callable[[int], mpf], n_max: int = DEFAULT_N_NEG_MAX) -> mpf:
    """Σ_{n∈Z} term(n)，两侧各在连续三项小于 10^-(dps+2)·|部分和| 时停止

    Raises:
        QDivergenceError: 任一侧在 n_max 项内未截断
    """
    eps = mpf(10) ** (-(mp.dps + 2))
    total = mpf(0)
    for start, step in ((0, 1), (-1, -1)):
        small = 0
        n = start
        for _ in range(n_max):
            value = term(n)
            total += value
            small = small + 1 if abs(value) <= eps * abs(total) else 0
            if small >= 3:
                break
            n += step
        else:
            raise QDivergenceError("双边和未截断", {"side": "small-x" if step > 0 else "large-x",
                                                   "n_max": n_max})
    return total


def weber_A_alpha(alpha: float, qp: QParam) -> mpf:
    """A_α = ∫_0^∞ x^{2α+1} / (-(1-q^2)x^2;q^2)_∞ d_q x

    Raises:
        QDomainError: alpha <= -1
    """
    if alpha <= -1:
        raise QDomainError("A_alpha 要求 alpha > -1", {"alpha": alpha})
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        q2 = qp.power(2)
        e = 2 * to_mpf(alpha) + 1

        def integrand(x: mpf) -> mpf:
            return x ** e / q_pochhammer(-(1 - q2) * x * x, q2, INF, qp.prod_tol)

        return jackson_0_to_inf(integrand, qp)


def _gaussian(exponent: int, qp: QParam) -> mpf:
    """e(-x^2;q^2) 在 x = q^exponent 处的值"""
    q2 = qp.power(2)
    return 1 / q_pochhammer(-(1 - q2) * qp.power(2 * exponent), q2, INF, qp.prod_tol)


def _weber_closed_form(a_exp: float, K: int, alpha: float, qp: QParam, A: mpf) -> mpf:
    """A_α a^{-2α-2} e(-q^{-2α-2} λ^2 / ((1+q)^2 a^2); q^2)，a = q^{a_exp}"""
    q = qp.base()
    e = 2 * to_mpf(alpha) + 2
    arg = -q ** (-e) * qp.power(-2 * K - 2 * a_exp) / (1 + q) ** 2
    return A * qp.power(-a_exp) ** e * q_exp_e(arg, qp, base_power=2)


def _sum_dps(qp: QParam, magnitude: mpf, value: mpf) -> int:
    """项的量级与结果之比决定求和所需位数"""
    if value == 0:
        return qp.working_dps(0)
    return qp.working_dps(max(0.0, float(mp.log10(abs(magnitude) / abs(value)))))


def weber_integral(a: Argument, lam: Argument, alpha: float, qp: QParam) -> WeberReport:
    """∫_0^∞ e(-a^2x^2;q^2) j_α(λx) x^{2α+1} d_q x 与闭式比较，a、λ 为网格点"""
    a_exp = qp.grid_exponent(a)
    K = -qp.grid_exponent(lam)
    A = weber_A_alpha(alpha, qp)
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        rhs_estimate = _weber_closed_form(a_exp, K, alpha, qp, A)
        scale = A * qp.power(-a_exp) ** (2 * to_mpf(alpha) + 2)
    with mp.workdps(_sum_dps(qp, scale, rhs_estimate)):
        q = qp.base()
        e = 2 * to_mpf(alpha) + 2
        rhs = _weber_closed_form(a_exp, K, alpha, qp, A)

        def term(n: int) -> mpf:
            bessel = j_alpha(QPoint(n - K), alpha, qp).value
            return (1 - q) * qp.power(n) ** e * _gaussian(n + a_exp, qp) * bessel

        lhs = _lattice_sum(term)
        residual = abs(lhs - rhs) / abs(rhs)
    return WeberReport(lhs=lhs, rhs=rhs, M0=A, residual=residual)


def heat_kernel(t: Argument, lam: Argument, alpha: float, qp: QParam) -> HeatKernelRecord:
    """q-热核 E_α(t,λ) = ∫ e(-t x^2;q^2) j_α(λx) x^{2α+1} d_q x，t = q^s（s 为偶数）

    闭式 A_α t^{-α-1} e(-q^{-2α-2}λ^2/((1+q)^2 t);q^2)。代换 x → x/√t 要求 √t
    也是格点，所以 s 必须为偶数。

    主项积分只在 cos(q^{-α-1/2}λx) 落在格点上时计算，此时 Θ = E - 主项积分。

    Raises:
        QDomainError: t 不是偶指数的网格点
    """
    s = qp.grid_exponent(t)
    if s % 2:
        raise QDomainError("t 必须是 q 的偶数次幂（√t 须落在格点上）", {"t_exp": s})
    a_exp = s // 2
    K = -qp.grid_exponent(lam)
    weber = weber_integral(QPoint(a_exp), QPoint(-K), alpha, qp)
    principal_integral = theta = theta_bound = None
    if principal_on_lattice(alpha, qp):
        with mp.workdps(_sum_dps(qp, weber.M0 * qp.power(-s * (alpha + 1)), weber.rhs)):
            q = qp.base()
            e = 2 * to_mpf(alpha) + 2

            def term(n: int) -> mpf:
                principal = q_cos(QPoint(n - K - alpha - 0.5), qp).value
                return (1 - q) * qp.power(n) ** e * _gaussian(n + a_exp, qp) * principal

            principal_integral = _lattice_sum(term)
            theta = weber.rhs - principal_integral
            C_q, _ = remainder_constants(alpha, qp)
            if alpha > -0.5:
                theta_bound = (C_q / qp.power(-K) * (1 - q)
                               * ramanujan_B_alpha(QPoint(s + 1), alpha, qp))
    else:
        logger.warning(f"alpha={alpha} 的主项不在格点上，主项积分发散，跳过 Θ")
    return HeatKernelRecord(
        alpha=alpha, t=qp.power(s), lam=qp.power(-K), A_alpha=weber.M0,
        E_value=weber.rhs, lhs_integral=weber.lhs, principal_integral=principal_integral,
        theta=theta, theta_bound=theta_bound, residual=weber.residual,
    )


def _ramanujan_a(t: mpf, q: mpf) -> mpf:
    return -(1 - q * q) * t / q


def ramanujan_B_alpha(t: Argument, alpha: float, qp: QParam) -> mpf:
    """B_α(t) 的乘积闭式

    (q^2, -q^{2α}(1-q^2)t, -q^{2-2α}/((1-q^2)t); q^2)_∞
    / (q^{2α+1}, -q^{-1}(1-q^2)t, -q^3/((1-q^2)t); q^2)_∞

    Raises:
        QDomainError: alpha <= -1/2（级数发散）或 t = 0
        QPoleError: 分母为零
    """
    if alpha <= -0.5:
        raise QDomainError("B_alpha 要求 alpha > -1/2", {"alpha": alpha})
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        q = qp.base()
        tv = qp.resolve(t)
        if tv == 0:
            raise QDomainError("B_alpha 要求 t != 0")
        q2 = q * q
        two_a = 2 * to_mpf(alpha)
        u = (1 - q2) * tv
        tol = qp.prod_tol
        num = (q_pochhammer(q2, q2, INF, tol) * q_pochhammer(-q ** two_a * u, q2, INF, tol)
               * q_pochhammer(-q ** (2 - two_a) / u, q2, INF, tol))
        den = (q_pochhammer(q ** (two_a + 1), q2, INF, tol) * q_pochhammer(-u / q, q2, INF, tol)
               * q_pochhammer(-q ** 3 / u, q2, INF, tol))
        if abs(den) < mpf(10) ** (-(mp.dps - 5)):
            raise QPoleError("B_alpha 的分母为零", {"t": tv, "alpha": alpha})
        return num / den


def ramanujan_direct_sum(t: Argument, alpha: float, qp: QParam) -> mpf:
    """Σ_{n∈Z} q^{(2α+1)n} / (a q^{2n};q^2)_∞，a = -q^{-1}(1-q^2)t"""
    if alpha <= -0.5:
        raise QDomainError("B_alpha 要求 alpha > -1/2", {"alpha": alpha})
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        q = qp.base()
        q2 = q * q
        a = _ramanujan_a(qp.resolve(t), q)
        e = 2 * to_mpf(alpha) + 1

        def term(n: int) -> mpf:
            den = q_pochhammer(a * qp.power(2 * n), q2, INF, qp.prod_tol)
            if den == 0:
                raise QPoleError("直接和的分母为零", {"n": n})
            return qp.power(n) ** e / den

        return _lattice_sum(term)


def heat_moment(t: Argument, alpha: float, qp: QParam) -> mpf:
    """∫_0^∞ e(-q^{-1} t x^2;q^2) x^{2α} d_q x，等于 (1-q) B_α(t)"""
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        q = qp.base()
        tv = qp.resolve(t)
        e = 2 * to_mpf(alpha)

        def integrand(x: mpf) -> mpf:
            return x ** e * q_exp_e(-tv * x * x / q, qp, base_power=2)

        return jackson_0_to_inf(integrand, qp)

