"""ネロン・テイト高さ（倍点の極限）と、小さい高さの点の探索。

正規化は hat h(P) = lim log max(|num x(2^k P)|, den x(2^k P)) / 4^k です。
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import mpmath

from .elliptic import CurveQ, Point, add_unchecked, require_on_curve, point_order
from .periods import to_mpf
from ..utils.logger import get_logger

logger = get_logger(__name__)

TAIL_STEPS = 40
TAIL_PREC = 128


@dataclass(frozen=True)
class HeightValue:
    value: mpmath.mpf
    err: mpmath.mpf

    def __float__(self) -> float:
        return float(self.value)


def _archimedean_tail(curve: CurveQ, x: Fraction, depth: int) -> mpmath.mpf:
    """sum_j Phi(t_j) / 4^(j+1+depth)（t_0 = x、t_{j+1} = F(t_j)/G(t_j)）。

    F = x^4 - b4 x^2 - 2 b6 x - b8、G = 4x^3 + b2 x^2 + 2 b4 x + b6。
    有限素点での約分は無視するため、全ての倍点が非特異点に還元される曲線で正確です。
    """
    with mpmath.workprec(TAIL_PREC):
        b2, b4, b6, b8 = (to_mpf(v) for v in (curve.b2, curve.b4, curve.b6, curve.b8))
        t = to_mpf(x)
        total = mpmath.mpf(0)
        for j in range(TAIL_STEPS):
            f = t**4 - b4 * t * t - 2 * b6 * t - b8
            g = 4 * t**3 + b2 * t * t + 2 * b4 * t + b6
            if g == 0:
                break
            phi = mpmath.log(max(abs(f), abs(g))) - 4 * mpmath.log(max(abs(t), 1))
            total += phi / mpmath.mpf(4) ** (j + 1 + depth)
            t = f / g
        return total


def canonical_height(curve: CurveQ, point: Point, depth: int = 8) -> HeightValue:
    """倍点を depth 回厳密に計算し、残りを実素点の級数で補う。

    err は depth と depth-2 での推定値の差。
    """
    require_on_curve(curve, point)
    if point.is_infinity or point_order(curve, point) > 0:
        return HeightValue(mpmath.mpf(0), mpmath.mpf(0))
    estimates = {}
    q = point
    for k in range(depth + 1):
        if k >= depth - 2:
            with mpmath.workprec(TAIL_PREC):
                h = mpmath.mpf(naive_height_exact(q)) / mpmath.mpf(4) ** k
                estimates[k] = h + _archimedean_tail(curve, q.x, k)
        if k < depth:
            q = add_unchecked(curve, q, q)
    with mpmath.workprec(TAIL_PREC):
        value = estimates[depth]
        err = abs(value - estimates[max(0, depth - 2)]) + mpmath.ldexp(1, -100)
    return HeightValue(value, err)


def naive_height_exact(point: Point) -> mpmath.mpf:
    """naive_height を多倍長で（巨大な分子分母でも桁落ちしない）。"""
    if point.is_infinity:
        return mpmath.mpf(0)
    with mpmath.workprec(TAIL_PREC):
        return mpmath.log(max(abs(point.x.numerator), point.x.denominator))


def _rational_sqrt(value: Fraction) -> Optional[Fraction]:
    if value < 0:
        return None
    num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def points_of_bounded_height(curve: CurveQ, bound: int) -> List[Point]:
    """x = n/e^2 で max(|n|, e^2) <= bound の有理点を列挙（無限遠点を除く）。"""
    found = []
    e = 1
    while e * e <= bound:
        for n in range(-bound, bound + 1):
            if math.gcd(n, e) != 1:
                continue
            x = Fraction(n, e * e)
            disc = 4 * x**3 + curve.b2 * x * x + 2 * curve.b4 * x + curve.b6
            root = _rational_sqrt(disc)
            if root is None:
                continue
            for s in {root, -root}:
                y = (-(curve.a1 * x + curve.a3) + s) / 2
                found.append(Point(x, y))
        e += 1
    return found


@dataclass(frozen=True)
class EtaEstimate:
    """非ねじれ点の高さの最小値の上からの推定。value が None なら "unknown"。"""

    value: Optional[mpmath.mpf]
    witness: Optional[Point]
    search_bound: int

    @property
    def is_known(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        return "unknown" if self.value is None else mpmath.nstr(self.value, 12)


def empirical_eta(curve: CurveQ, search_bound: int = 10) -> EtaEstimate:
    """探索範囲内の非ねじれ有理点の最小の標準高さ。"""
    best: Optional[HeightValue] = None
    witness: Optional[Point] = None
    for pt in points_of_bounded_height(curve, search_bound):
        if point_order(curve, pt) > 0:
            continue
        h = canonical_height(curve, pt)
        if best is None or h.value < best.value:
            best, witness = h, pt
    if best is None:
        logger.info(
            "%s: no non-torsion point with naive height <= %d", curve, search_bound
        )
        return EtaEstimate(None, None, search_bound)
    return EtaEstimate(best.value, witness, search_bound)
