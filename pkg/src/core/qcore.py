"""q-微积分核心模块

提供几何网格 R_{q,+} 上的基础运算：q-移位阶乘、q-Gamma 函数、q-导数
以及三种 Jackson 积分。其他模块的所有计算都建立在本模块之上。

数值约定：
    所有实数以 mpmath 的 mpf 表示（无指数溢出）。精度通过 mp.workdps 上下文
    临时提升，从不降低调用方已有的精度。结构性底数（1-q = q^m）在每个工作
    精度下重新求根，保证格点在任意位数下都精确对齐。
"""

import csv
import math
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, List, Optional, Union

import numpy as np
from mpmath import mp, mpf

from src.core.errors import QDomainError, QRangeError, QDivergenceError, QEvaluationError

logger = logging.getLogger('qcore')

INF = math.inf

DEFAULT_PROD_TOL = 1e-16
DEFAULT_TAIL_TOL = 1e-16
# extended 模式下乘积与尾项的截断容差上限
EXTENDED_TRUNCATION_TOL = 1e-32
MIN_JACKSON_TERMS = 8
DEFAULT_N_NEG_MAX = 400
GUARD_DIGITS = 10
METHOD_SERIES = "series"
METHOD_EXTENDED = "extended-precision"
STRUCTURAL_LOG_TOL = 1e-9
STRUCTURAL_VALUE_TOL = 1e-12

# 二进制64模式下允许的放大量（位数），超过则自动提升精度
BINARY64_SLACK_DIGITS = 3

Real = Union[int, float, mpf]


class Precision(str, Enum):
    """精度模式"""
    BINARY64 = "binary64"
    EXTENDED = "extended"

    @property
    def target_digits(self) -> int:
        return 15 if self is Precision.BINARY64 else 30


def to_mpf(value: Any) -> mpf:
    """转换为 mpf；已经是 mpf 的值原样返回，不做舍入"""
    if isinstance(value, mpf):
        return value
    return mpf(value)


def format_real(value: Any) -> str:
    """以 17 位有效数字格式化实数（可往返）"""
    return mp.nstr(to_mpf(value), 17)


def json_real(value: Any) -> Union[float, str, None]:
    """JSON 数值：能以 binary64 表示时为 float，否则为 17 位有效数字的字符串"""
    if value is None:
        return None
    value = to_mpf(value)
    text = mp.nstr(value, 17)
    number = float(text)
    if not math.isfinite(number) or (number == 0 and value != 0):
        return text
    return number


@lru_cache(maxsize=256)
def _structural_root(m: int, dps: int) -> mpf:
    """求 q^m + q - 1 = 0 在 (0,1) 内的唯一根"""
    with mp.workdps(dps + 10):
        # 函数在 (0,1) 上严格递增，先二分再牛顿
        lo, hi = mpf(0), mpf(1)
        for _ in range(60):
            mid = (lo + hi) / 2
            if mid ** m + mid - 1 > 0:
                hi = mid
            else:
                lo = mid
        x = (lo + hi) / 2
        eps = mpf(10) ** (-(dps + 5))
        for _ in range(200):
            step = (x ** m + x - 1) / (m * x ** (m - 1) + 1)
            x -= step
            if abs(step) < eps:
                break
        return x


@dataclass(frozen=True)
class QPoint:
    """表示 coefficient * q^exponent 的点，在工作精度下才求值"""
    exponent: float
    coefficient: float = 1.0

    def shifted(self, delta: float) -> 'QPoint':
        return QPoint(self.exponent + delta, self.coefficient)


Argument = Union[Real, QPoint]


@dataclass(frozen=True)
class QParam:
    """底数 q 及其派生常数

    Attributes:
        q: 底数，0 < q < 1
        structural_m: 若 1-q = q^m 成立则为 m，否则为 None
        cos_sin_bound: 1/(q;q^2)_inf^2
        prod_tol: 无穷乘积截断容差
        tail_tol: Jackson 积分尾项容差
        precision: 精度模式
    """
    q: float
    structural_m: Optional[int]
    cos_sin_bound: mpf
    prod_tol: float = DEFAULT_PROD_TOL
    tail_tol: float = DEFAULT_TAIL_TOL
    precision: Precision = Precision.BINARY64

    @property
    def is_structural(self) -> bool:
        return self.structural_m is not None

    def base(self) -> mpf:
        """当前工作精度下的 q"""
        if self.structural_m is not None:
            return _structural_root(self.structural_m, mp.dps)
        return mpf(self.q)

    def power(self, exponent: float) -> mpf:
        base = self.base()
        if float(exponent).is_integer():
            return base ** int(exponent)
        return base ** to_mpf(exponent)

    def resolve(self, x: Argument) -> mpf:
        """把实数或 QPoint 转成当前精度下的 mpf"""
        if isinstance(x, QPoint):
            return to_mpf(x.coefficient) * self.power(x.exponent)
        return to_mpf(x)

    def log10_abs(self, x: Argument) -> float:
        """log10|x| 的浮点估计，x = 0 时返回 -inf"""
        if isinstance(x, QPoint):
            if x.coefficient == 0:
                return -INF
            return x.exponent * math.log10(self.q) + math.log10(abs(x.coefficient))
        value = to_mpf(x)
        if value == 0:
            return -INF
        return float(mp.log10(abs(value)))

    def grid_exponent(self, x: Argument) -> int:
        """校验 x 是正的网格点 q^k 并返回 k

        Raises:
            QDomainError: x 不是正的网格点
        """
        if isinstance(x, QPoint):
            if x.coefficient != 1 or not float(x.exponent).is_integer():
                raise QDomainError("参数不是网格点 q^k", {"point": x})
            return int(x.exponent)
        value = to_mpf(x)
        if value <= 0:
            raise QDomainError("网格点必须为正", {"x": value})
        exponent = float(mp.log(value) / mp.log(self.base()))
        k = int(round(exponent))
        if abs(exponent - k) > STRUCTURAL_LOG_TOL:
            raise QDomainError("参数不是网格点 q^k", {"x": value, "log_q(x)": exponent})
        return k

    def working_dps(self, log10_peak: float, extra: float = 0.0) -> int:
        """根据抵消放大量给出工作精度（十进制位数）

        Args:
            log10_peak: 级数最大项的 log10（抵消见证）
            extra: 额外需要的位数（如递推的种子误差放大）
        """
        target = self.precision.target_digits
        amplification = 2.0 * max(log10_peak, 0.0) + max(extra, 0.0)
        if self.precision is Precision.BINARY64 and amplification <= BINARY64_SLACK_DIGITS:
            return max(mp.dps, target)
        return max(mp.dps, target + int(math.ceil(amplification)) + GUARD_DIGITS)

    def method_for(self, dps: int) -> str:
        return METHOD_SERIES if dps <= Precision.BINARY64.target_digits else METHOD_EXTENDED

    def effective_tol(self, tol: float) -> mpf:
        """容差上限随工作精度收紧"""
        return min(to_mpf(tol), mpf(10) ** (-(mp.dps + 2)))


def q_pochhammer(a: Real, q: Real, n: Union[int, float] = INF,
                 prod_tol: float = DEFAULT_PROD_TOL) -> mpf:
    """q-移位阶乘 (a;q)_n

    n 为有限值时返回 prod_{k<n}(1 - a q^k)；n = inf 时在 |a q^k| < prod_tol
    处截断（prod_tol 同时受工作精度约束）。

    Raises:
        QDomainError: q 不在 (0,1) 或 n 为负
    """
    a = to_mpf(a)
    q = to_mpf(q)
    if not 0 < q < 1:
        raise QDomainError("q 必须位于 (0,1)", {"q": q})
    result = mpf(1)
    if n != INF:
        if n < 0 or int(n) != n:
            raise QDomainError("n 必须为非负整数", {"n": n})
        term = a
        for _ in range(int(n)):
            result *= 1 - term
            term *= q
        return result
    tol = min(to_mpf(prod_tol), mpf(10) ** (-(mp.dps + 2)))
    term = a
    count = 0
    while abs(term) >= tol:
        result *= 1 - term
        term *= q
        count += 1
        if count > 10_000_000:
            raise QEvaluationError("无穷乘积无法截断", {"a": a, "q": q})
    return result


def make_q_param(q: float, prod_tol: float = DEFAULT_PROD_TOL,
                 precision: Union[Precision, str] = Precision.BINARY64,
                 tail_tol: float = DEFAULT_TAIL_TOL) -> QParam:
    """构造 QParam，并检测结构性约束 log(1-q)/log q ∈ Z

    extended 精度下 prod_tol、tail_tol 不超过 EXTENDED_TRUNCATION_TOL。

    Raises:
        QDomainError: q 不在 (0,1)，或 prod_tol、tail_tol 不为正
    """
    if not isinstance(q, (int, float)) or not 0 < q < 1:
        raise QDomainError("q 必须位于 (0,1)", {"q": q})
    if prod_tol <= 0 or tail_tol <= 0:
        raise QDomainError("容差必须为正", {"prod_tol": prod_tol, "tail_tol": tail_tol})
    precision = Precision(precision)

    structural_m = None
    ratio = math.log(1 - q) / math.log(q)
    m = int(round(ratio))
    if (m >= 1 and abs(ratio - m) <= STRUCTURAL_LOG_TOL
            and abs(q ** m - (1 - q)) <= STRUCTURAL_VALUE_TOL):
        structural_m = m
    else:
        logger.debug(f"q={q} 不满足结构性约束 (log(1-q)/log q = {ratio:.12g})")

    return _build(float(q), structural_m, prod_tol, precision, tail_tol)


def structural_q(m: int, prod_tol: float = DEFAULT_PROD_TOL,
                 precision: Union[Precision, str] = Precision.BINARY64,
                 tail_tol: float = DEFAULT_TAIL_TOL) -> QParam:
    """返回满足 q^m + q - 1 = 0 的 QParam"""
    if not isinstance(m, int) or m < 1:
        raise QDomainError("structural m 必须为正整数", {"m": m})
    q = float(_structural_root(m, 30))
    return _build(q, m, prod_tol, Precision(precision), tail_tol)


def _build(q: float, structural_m: Optional[int], prod_tol: float, precision: Precision,
           tail_tol: float = DEFAULT_TAIL_TOL) -> QParam:
    if precision is Precision.EXTENDED:
        prod_tol = min(prod_tol, EXTENDED_TRUNCATION_TOL)
        tail_tol = min(tail_tol, EXTENDED_TRUNCATION_TOL)
    with mp.workdps(max(mp.dps, 20)):
        base = _structural_root(structural_m, mp.dps) if structural_m else mpf(q)
        bound = 1 / q_pochhammer(base, base * base, INF, prod_tol) ** 2
    return QParam(q=q, structural_m=structural_m, cos_sin_bound=bound,
                  prod_tol=prod_tol, tail_tol=tail_tol, precision=precision)


def q_gamma(x: Real, qp: QParam, base_power: int = 1) -> mpf:
    """q-Gamma 函数 Γ_Q(x)，Q = q^base_power

    Raises:
        QDomainError: x 为非正整数（极点）
    """
    x = to_mpf(x)
    if x <= 0 and x == int(x):
        raise QDomainError("q-Gamma 在非正整数处有极点", {"x": x})
    with mp.workdps(max(mp.dps, qp.precision.target_digits + 5)):
        Q = qp.power(base_power)
        num = q_pochhammer(Q, Q, INF, qp.prod_tol)
        den = q_pochhammer(Q ** x, Q, INF, qp.prod_tol)
        return num / den * (1 - Q) ** (1 - x)


@dataclass(frozen=True)
class QGrid:
    """截断几何网格 {q^k : k_min <= k <= k_max}

    k_min 对应最大的 x，k_max 对应最小的 x。
    """
    qp: QParam
    k_min: int
    k_max: int

    def __post_init__(self):
        if self.k_min > self.k_max:
            raise QDomainError("网格要求 k_min <= k_max", {"k_min": self.k_min, "k_max": self.k_max})

    def __len__(self) -> int:
        return self.k_max - self.k_min + 1

    def exponents(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def contains(self, k: int) -> bool:
        return self.k_min <= k <= self.k_max

    def index(self, k: int) -> int:
        if not self.contains(k):
            raise QRangeError("网格下标越界", {"k": k, "k_min": self.k_min, "k_max": self.k_max})
        return k - self.k_min

    def point(self, k: int) -> mpf:
        return self.qp.power(k)

    def points(self) -> np.ndarray:
        return np.array([self.qp.power(k) for k in self.exponents()], dtype=object)

    def weights(self) -> np.ndarray:
        """Jackson 权重 (1-q) q^k"""
        one_minus_q = 1 - self.qp.base()
        return np.array([one_minus_q * self.qp.power(k) for k in self.exponents()], dtype=object)

    def sub(self, k_lo: int, k_hi: int) -> 'QGrid':
        self.index(k_lo)
        self.index(k_hi)
        return QGrid(self.qp, k_lo, k_hi)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """网格函数：以网格指数 k 为下标的实数值"""
    grid: QGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array([to_mpf(v) for v in self.values], dtype=object)
        if len(values) != len(self.grid):
            raise QDomainError("网格函数长度与网格不符",
                               {"length": len(values), "grid": len(self.grid)})
        for k, v in zip(self.grid.exponents(), values):
            if not mp.isfinite(v):
                raise QEvaluationError("网格函数含非有限值", {"k": k})
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_callable(cls, grid: QGrid, fn: Callable[[int, mpf], Any]) -> 'GridFunction':
        """由 fn(k, x) 在每个网格点求值构造"""
        return cls(grid, [fn(k, grid.point(k)) for k in grid.exponents()])

    @classmethod
    def constant(cls, grid: QGrid, value: Real) -> 'GridFunction':
        return cls(grid, [value] * len(grid))

    @property
    def dps(self) -> int:
        """数据本身携带的精度（十进制位数），不低于当前工作精度"""
        bits = max((v._mpf_[3] for v in self.values), default=0)
        return max(mp.dps, int(bits * 0.30103))

    def at(self, k: int) -> mpf:
        return self.values[self.grid.index(k)]

    def items(self):
        return zip(self.grid.exponents(), self.values)

    def sup_norm(self) -> mpf:
        return max(abs(v) for v in self.values)

    def abs(self) -> 'GridFunction':
        return GridFunction(self.grid, np.abs(self.values))

    def restrict(self, k_lo: int, k_hi: int) -> 'GridFunction':
        sub = self.grid.sub(k_lo, k_hi)
        start = self.grid.index(k_lo)
        return GridFunction(sub, self.values[start:start + len(sub)])

    def _operand(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise QDomainError("网格函数定义在不同网格上")
            return other.values
        return to_mpf(other)

    def __add__(self, other) -> 'GridFunction':
        return GridFunction(self.grid, self.values + self._operand(other))

    def __sub__(self, other) -> 'GridFunction':
        return GridFunction(self.grid, self.values - self._operand(other))

    def __mul__(self, other) -> 'GridFunction':
        return GridFunction(self.grid, self.values * self._operand(other))

    __rmul__ = __mul__

    def __neg__(self) -> 'GridFunction':
        return GridFunction(self.grid, -self.values)

    def to_csv(self, path: str) -> None:
        """写出 CSV，表头 k,x,value"""
        with mp.workdps(max(mp.dps, 20)):
            rows = [[k, format_real(self.grid.point(k)), format_real(v)] for k, v in self.items()]
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['k', 'x', 'value'])
            writer.writerows(rows)

    @classmethod
    def from_csv(cls, path: str, grid: QGrid) -> 'GridFunction':
        """读取 k,x,value 表；必须恰好覆盖网格"""
        table = {}
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or not {'k', 'value'} <= set(reader.fieldnames):
                raise QDomainError("CSV 缺少 k,value 列", {"path": path})
            with mp.workdps(max(mp.dps, 20)):
                for row in reader:
                    table[int(row['k'])] = mpf(row['value'])
        missing = [k for k in grid.exponents() if k not in table]
        if missing:
            raise QDomainError("CSV 未覆盖整个网格", {"path": path, "first_missing": missing[0]})
        return cls(grid, [table[k] for k in grid.exponents()])


def q_derivative(f: GridFunction, k: int) -> mpf:
    """D_q f(q^k) = (f(q^k) - f(q^{k+1})) / ((1-q) q^k)"""
    qp = f.grid.qp
    f0, f1 = f.at(k), f.at(k + 1)
    with mp.workdps(f.dps):
        return (f0 - f1) / ((1 - qp.base()) * qp.power(k))


def q_derivative2(f: GridFunction, k: int) -> mpf:
    """二阶 q-导数，等价于两次 q_derivative"""
    qp = f.grid.qp
    f0, f1, f2 = f.at(k), f.at(k + 1), f.at(k + 2)
    with mp.workdps(f.dps):
        q = qp.base()
        return (q * f0 - (1 + q) * f1 + f2) / (q * (1 - q) ** 2 * qp.power(2 * k))


Integrand = Union[Callable[[mpf], Any], GridFunction]


def _evaluate(f: Callable[[mpf], Any], x: mpf) -> mpf:
    value = to_mpf(f(x))
    if not mp.isfinite(value):
        raise QEvaluationError("被积函数取非有限值", {"x": x})
    return value


def grid_jackson(f: GridFunction, k_lo: Optional[int] = None, k_hi: Optional[int] = None) -> mpf:
    """截断网格上的 Jackson 和 (1-q) Σ_{k_lo<=k<=k_hi} f(q^k) q^k"""
    grid = f.grid
    k_lo = grid.k_min if k_lo is None else k_lo
    k_hi = grid.k_max if k_hi is None else k_hi
    if k_lo > k_hi:
        return mpf(0)
    start, stop = grid.index(k_lo), grid.index(k_hi) + 1
    return mp.fsum(f.values[start:stop] * grid.weights()[start:stop])


def cumulative_jackson(f: GridFunction) -> GridFunction:
    """累积积分 I(q^k) = ∫_0^{q^k} f d_q x（网格截断）"""
    weighted = f.values * f.grid.weights()
    return GridFunction(f.grid, np.cumsum(weighted[::-1])[::-1])


def jackson_0_to_a(f: Integrand, a: Argument, qp: QParam,
                   tail_tol: Optional[float] = None,
                   min_terms: int = MIN_JACKSON_TERMS, max_terms: int = 100_000) -> mpf:
    """Jackson 积分 ∫_0^a f d_q x，a 必须是网格点

    Raises:
        QDomainError: a 不是网格点
        QEvaluationError: 被积函数出现非有限值
    """
    k_a = qp.grid_exponent(a)
    if isinstance(f, GridFunction):
        return grid_jackson(f, k_a, f.grid.k_max)
    q = qp.base()
    tol = qp.effective_tol(qp.tail_tol if tail_tol is None else tail_tol)
    x = qp.power(k_a)
    total = mpf(0)
    for n in range(max_terms):
        term = (1 - q) * x * _evaluate(f, x)
        total += term
        if n + 1 >= min_terms and abs(term) < tol:
            return total
        x *= q
    raise QDivergenceError("小 x 端未收敛", {"a": a, "terms": max_terms})


def _still_growing(terms: List[mpf]) -> bool:
    """三项不减且增长比不减

    先增后衰的被积函数（如 x^p e(-x^2)）增长比严格下降，不算发散。
    """
    if len(terms) < 3 or not 0 < terms[0] <= terms[1] <= terms[2]:
        return False
    return terms[2] * terms[0] >= terms[1] * terms[1]


def _large_side(f: Callable[[mpf], Any], k_start: int, qp: QParam, n_neg_max: int,
                tail_tol: Optional[float]) -> mpf:
    """沿 x = q^{k_start}, q^{k_start-1}, ... 向外求和

    Raises:
        QDivergenceError: 出现持续增长的三项，或到 n_neg_max 时末三项仍不减
    """
    q = qp.base()
    tol = qp.effective_tol(qp.tail_tol if tail_tol is None else tail_tol)
    total = mpf(0)
    recent = []
    small_run = 0
    for n in range(n_neg_max):
        x = qp.power(k_start - n)
        term = (1 - q) * x * _evaluate(f, x)
        total += term
        recent = (recent + [abs(term)])[-3:]
        small_run = small_run + 1 if abs(term) < tol else 0
        if small_run >= 2:
            return total
        if _still_growing(recent):
            raise QDivergenceError("大 x 端的项在持续增长", {"x": x, "terms": n + 1,
                                                         "last_terms": [float(t) for t in recent]})
    if len(recent) == 3 and recent[0] <= recent[1] <= recent[2]:
        raise QDivergenceError("大 x 端的项仍在增长", {"n_neg_max": n_neg_max,
                                                     "last_terms": [float(t) for t in recent]})
    logger.warning(f"大 x 端在 n_neg_max={n_neg_max} 处截断，末项 {float(recent[-1]):.3e}")
    return total


def jackson_0_to_inf(f: Integrand, qp: QParam, n_neg_max: int = DEFAULT_N_NEG_MAX,
                     tail_tol: Optional[float] = None,
                     min_terms: int = MIN_JACKSON_TERMS) -> mpf:
    """双边 Jackson 积分 (1-q) Σ_{n∈Z} f(q^n) q^n

    Raises:
        QDivergenceError: 大 x 端的项持续增长，或在 n_neg_max 处仍不减
    """
    if isinstance(f, GridFunction):
        return grid_jackson(f)
    inner = jackson_0_to_a(f, QPoint(0), qp, tail_tol, min_terms)
    return inner + _large_side(f, -1, qp, n_neg_max, tail_tol)


def jackson_a_to_inf(f: Integrand, a: Argument, qp: QParam,
                     n_neg_max: int = DEFAULT_N_NEG_MAX,
                     tail_tol: Optional[float] = None) -> mpf:
    """Jackson 积分 ∫_a^∞ f d_q x = (1-q) a Σ_{n>=1} f(a q^{-n}) q^{-n}"""
    k_a = qp.grid_exponent(a)
    if isinstance(f, GridFunction):
        return grid_jackson(f, f.grid.k_min, k_a - 1)
    return _large_side(f, k_a - 1, qp, n_neg_max, tail_tol)
