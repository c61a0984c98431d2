"""q展開と、打ち切り誤差の上界付き評価。

各級数は係数の供給関数と係数の増大度モデル ``TailModel`` を持ちます。
評価時には幾何級数で尾部を押さえ、要求精度に届くまで項数を倍増させます。
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Sequence, Union

import mpmath
from sympy import divisor_sigma

from .precision import PrecComplex
from ..core.errors import IndeterminateError, InvalidInputError
from ..utils.logger import get_logger

logger = get_logger(__name__)

Coefficient = Union[int, Fraction]
MAX_TERMS = 1 << 16


@dataclass(frozen=True)
class TailModel:
    """|c_n| <= const * n^power * exp(sqrt_rate * sqrt(n)) （n >= 1）。"""

    const: float
    power: float
    sqrt_rate: float


@dataclass(frozen=True)
class QSeries:
    """sum_{n>=0} c_n q^(n + valuation) の形の級数。

    ``coefficients(T)`` は c_0..c_{T-1} を返す。
    """

    name: str
    coefficients: Callable[[int], Sequence[Coefficient]]
    valuation: int
    tail: TailModel


def _mul_series(a: Sequence[int], b: Sequence[int], n: int) -> List[int]:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for k, y in enumerate(b[: n - i]):
            out[i + k] += x * y
    return out


def _inverse_series(a: Sequence[int], n: int) -> List[int]:
    """先頭係数1の整数級数の逆元。"""
    if a[0] != 1:
        raise InvalidInputError("series must have leading coefficient 1")
    inv = [0] * n
    inv[0] = 1
    for k in range(1, n):
        inv[k] = -sum(a[i] * inv[k - i] for i in range(1, min(k, len(a) - 1) + 1))
    return inv


@lru_cache(maxsize=8)
def _eisenstein(weight: int, n: int) -> tuple:
    factor = {4: 240, 6: -504}[weight]
    tail = [factor * int(divisor_sigma(m, weight - 1)) for m in range(1, n)]
    return tuple([1] + tail)


@lru_cache(maxsize=8)
def _delta_over_q(n: int) -> tuple:
    """prod (1 - q^m)^24 の係数。"""
    series = [1] + [0] * (n - 1)
    for m in range(1, n):
        for _ in range(24):
            for k in range(n - 1, m - 1, -1):
                series[k] -= series[k - m]
    return tuple(series)


def _rounded_up(count: int) -> int:
    size = 32
    while size < count:
        size *= 2
    return size


@lru_cache(maxsize=8)
def _j_table(n: int) -> tuple:
    e4 = list(_eisenstein(4, n))
    e4_cubed = _mul_series(_mul_series(e4, e4, n), e4, n)
    return tuple(_mul_series(e4_cubed, _inverse_series(_delta_over_q(n), n), n))


def j_coefficients(count: int) -> Sequence[int]:
    """j = q^-1 + 744 + 196884 q + ... の係数を ``count`` 個。"""
    return _j_table(_rounded_up(count))[:count]


def eisenstein_coefficients(weight: int, count: int) -> Sequence[int]:
    """正規化アイゼンシュタイン級数 E4, E6 の係数。"""
    if weight not in (4, 6):
        raise InvalidInputError("only weights 4 and 6 are supported")
    return _eisenstein(weight, _rounded_up(count))[:count]


J_SERIES = QSeries("j", j_coefficients, -1, TailModel(1.0, 0.0, 4 * float(mpmath.pi)))
E4_SERIES = QSeries(
    "E4", lambda n: eisenstein_coefficients(4, n), 0, TailModel(289.0, 3.0, 0.0)
)
E6_SERIES = QSeries(
    "E6", lambda n: eisenstein_coefficients(6, n), 0, TailModel(523.0, 5.0, 0.0)
)


def nome(tau, prec: int) -> mpmath.mpc:
    """q = exp(2 pi i tau)。"""
    with mpmath.workprec(prec):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise InvalidInputError("not in upper half plane")
        return mpmath.exp(2j * mpmath.pi * tau)


def tail_bound(model: TailModel, terms: int, r, valuation: int) -> mpmath.mpf:
    """index >= terms の項の絶対値の和の上界。収束が保証できなければ inf。"""
    t = mpmath.mpf(terms)
    growth = mpmath.exp(model.sqrt_rate / (2 * mpmath.sqrt(t)))
    ratio = (1 + 1 / t) ** model.power * growth * r
    if ratio >= 1:
        return mpmath.inf
    first = (
        model.const
        * t**model.power
        * mpmath.exp(model.sqrt_rate * mpmath.sqrt(t))
        * r ** (terms + valuation)
    )
    return first / (1 - ratio)


def eval_qseries(series: QSeries, tau, prec: int, start_terms: int = 16) -> PrecComplex:
    """``series`` を tau で評価し、打ち切りと丸めの誤差半径を付けて返す。"""
    guard = prec + 32
    q = nome(tau, guard)
    with mpmath.workprec(guard):
        r = abs(q)
        target = mpmath.ldexp(1, -prec - 8)
        terms = max(start_terms, 2)
        tail = tail_bound(series.tail, terms, r, series.valuation)
        while tail >= target:
            terms *= 2
            if terms > MAX_TERMS:
                raise IndeterminateError(
                    f"q-series {series.name} does not converge fast enough "
                    "at this point"
                )
            tail = tail_bound(series.tail, terms, r, series.valuation)
        coeffs = series.coefficients(terms)
        total = mpmath.mpc(0)
        magnitude = mpmath.mpf(0)
        power = q**series.valuation
        for c in coeffs:
            if c:
                c_val = (
                    mpmath.mpf(c.numerator) / c.denominator
                    if isinstance(c, Fraction)
                    else c
                )
                term = c_val * power
                total += term
                magnitude += abs(term)
            power *= q
        rounding = (terms + 4) * magnitude * mpmath.ldexp(1, 2 - guard)
    logger.debug("%s: %d terms, tail <= %s", series.name, terms, mpmath.nstr(tail, 3))
    with mpmath.workprec(prec):
        value = +total
    return PrecComplex.rounded(value, prec, tail + rounding)
