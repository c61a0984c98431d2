"""有理数体上の楕円曲線と有理点の群演算。

一般ワイエルシュトラス形 y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 を扱います。
係数はすべて ``Fraction`` で保持し、群演算は厳密に行います。
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from sympy import Poly, Symbol, factorint, isprime

from ..core.errors import InvalidInputError
from ..utils.logger import get_logger

logger = get_logger(__name__)

Rational = Union[int, Fraction]
MAX_TORSION_ORDER = 12


def _frac(value: Union[str, Rational]) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class CurveQ:
    """有理数体上の楕円曲線（判別式は非零）。"""

    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction
    conductor: Optional[int] = None
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.disc == 0:
            raise InvalidInputError("singular curve: discriminant is zero")

    @classmethod
    def parse(
        cls, text: str, conductor: Optional[int] = None, label: Optional[str] = None
    ) -> "CurveQ":
        """"a1,a2,a3,a4,a6" 形式（角括弧は省略可）から生成。"""
        parts = [p.strip() for p in text.strip().strip("[]").split(",")]
        if len(parts) != 5 or not all(parts):
            raise InvalidInputError(
                f"curve must be five rationals a1,a2,a3,a4,a6: {text!r}"
            )
        coeffs = [_frac(p) for p in parts]
        return cls(*coeffs, conductor=conductor, label=label)

    @property
    def ainvs(self) -> Tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.ainvs)

    @property
    def b2(self) -> Fraction:
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self) -> Fraction:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> Fraction:
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self) -> Fraction:
        a1, a2, a3, a4, a6 = self.ainvs
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def c4(self) -> Fraction:
        return self.b2 * self.b2 - 24 * self.b4

    @property
    def c6(self) -> Fraction:
        b2, b4 = self.b2, self.b4
        return -(b2**3) + 36 * b2 * b4 - 216 * self.b6

    @property
    def disc(self) -> Fraction:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j(self) -> Fraction:
        return self.c4**3 / self.disc

    def contains(self, point: "Point") -> bool:
        if point.is_infinity:
            return True
        x, y = point.x, point.y
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y == x**3 + a2 * x * x + a4 * x + a6

    def __str__(self) -> str:
        coeffs = ",".join(str(a) for a in self.ainvs)
        return self.label or f"[{coeffs}]"


@dataclass(frozen=True)
class Point:
    """有理点。x, y が None なら無限遠点。"""

    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    @classmethod
    def infinity(cls) -> "Point":
        return cls()

    @classmethod
    def parse(cls, text: str) -> "Point":
        """"(x,y)" または "x,y"、無限遠点は "O" か "inf"。"""
        body = text.strip()
        if body.lower() in ("o", "0", "inf", "infinity"):
            return cls.infinity()
        parts = [p.strip() for p in body.strip("()").split(",")]
        if len(parts) != 2:
            raise InvalidInputError(f"point must be (x,y): {text!r}")
        return cls(_frac(parts[0]), _frac(parts[1]))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self) -> str:
        return "O" if self.is_infinity else f"({self.x},{self.y})"


def require_on_curve(curve: CurveQ, *points: Point) -> None:
    for p in points:
        if not curve.contains(p):
            raise InvalidInputError(f"point not on curve: {p}")


def point_neg(curve: CurveQ, p: Point) -> Point:
    require_on_curve(curve, p)
    if p.is_infinity:
        return p
    return Point(p.x, -p.y - curve.a1 * p.x - curve.a3)


def add_unchecked(curve: CurveQ, p: Point, q: Point) -> Point:
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    a1, a2, a3, a4, a6 = curve.ainvs
    x1, y1, x2, y2 = p.x, p.y, q.x, q.y
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return Point.infinity()
        denom = 2 * y1 + a1 * x1 + a3
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / denom
        nu = (-(x1**3) + a4 * x1 + 2 * a6 - a3 * y1) / denom
    else:
        lam = (y2 - y1) / (x2 - x1)
        nu = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return Point(x3, y3)


def point_add(curve: CurveQ, p: Point, q: Point) -> Point:
    """P + Q（厳密な有理数演算）。"""
    require_on_curve(curve, p, q)
    return add_unchecked(curve, p, q)


def point_mul(curve: CurveQ, k: int, p: Point) -> Point:
    """k P（負の k も可）。"""
    require_on_curve(curve, p)
    if k < 0:
        return point_mul(curve, -k, point_neg(curve, p))
    result = Point.infinity()
    addend = p
    while k:
        if k & 1:
            result = add_unchecked(curve, result, addend)
        addend = add_unchecked(curve, addend, addend)
        k >>= 1
    return result


def point_order(curve: CurveQ, p: Point, limit: int = MAX_TORSION_ORDER) -> int:
    """P の位数（limit を超えるなら 0、すなわち無限位数とみなす）。"""
    require_on_curve(curve, p)
    q = p
    for n in range(1, limit + 1):
        if q.is_infinity:
            return n
        q = add_unchecked(curve, q, p)
    return 0


def naive_height(p: Point) -> float:
    """log max(|num x|, |den x|)（無限遠点は0）。"""
    if p.is_infinity:
        return 0.0
    return math.log(max(abs(p.x.numerator), p.x.denominator))


def _integral_ainvs(curve: CurveQ) -> Tuple[int, ...]:
    if not curve.is_integral:
        raise InvalidInputError("an integral Weierstrass model is required")
    return tuple(int(a) for a in curve.ainvs)


def count_points_mod_p(curve: CurveQ, p: int) -> int:
    """#E(F_p)（良い還元の素数 p、無限遠点を含む）。"""
    a1, a2, a3, a4, a6 = _integral_ainvs(curve)
    if p == 2:
        count = 1
        for x in range(2):
            for y in range(2):
                lhs = y * y + a1 * x * y + a3 * y
                if (lhs - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    count += 1
        return count
    squares = [0] * p
    for t in range(p):
        squares[t * t % p] += 1
    b2, b4, b6 = int(curve.b2), int(curve.b4), int(curve.b6)
    count = 1
    for x in range(p):
        count += squares[(4 * x**3 + b2 * x * x + 2 * b4 * x + b6) % p]
    return count


def _singular_point_mod_p(curve: CurveQ, p: int) -> Tuple[int, int]:
    a1, a2, a3, a4, a6 = _integral_ainvs(curve)
    for x in range(p):
        for y in range(p):
            f = y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6
            fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
            fy = 2 * y + a1 * x + a3
            if f % p == 0 and fx % p == 0 and fy % p == 0:
                return x, y
    raise InvalidInputError(f"no singular point mod {p}; is the model minimal?")


def reduction_type(curve: CurveQ, p: int) -> str:
    """"good"・"split"・"nonsplit"・"additive" のいずれか（最小モデルを仮定）。"""
    disc = curve.disc
    if disc.numerator % p != 0:
        return "good"
    if int(curve.c4) % p == 0:
        return "additive"
    x0, _ = _singular_point_mod_p(curve, p)
    a1, a2 = int(curve.a1), int(curve.a2)
    # 特異点での接錐 t^2 + a1 t - (3 x0 + a2) が F_p 上で分解するか
    for t in range(p):
        if (t * t + a1 * t - (3 * x0 + a2)) % p == 0:
            return "split"
    return "nonsplit"


def ap(curve: CurveQ, p: int) -> int:
    """フロベニウスのトレース a_p。"""
    if not isprime(p):
        raise InvalidInputError(f"{p} is not prime")
    kind = reduction_type(curve, p)
    if kind == "good":
        return p + 1 - count_points_mod_p(curve, p)
    return {"split": 1, "nonsplit": -1, "additive": 0}[kind]


def conductor(curve: CurveQ) -> int:
    """導手。2, 3 での加法的還元は入力で導手を与える必要があります。"""
    if curve.conductor is not None:
        return curve.conductor
    _integral_ainvs(curve)
    n = 1
    for p in factorint(abs(curve.disc.numerator)):
        kind = reduction_type(curve, p)
        if kind in ("split", "nonsplit"):
            n *= p
        elif p >= 5:
            n *= p * p
        else:
            raise InvalidInputError(
                f"additive reduction at {p}: pass the conductor explicitly"
            )
    return n


@dataclass(frozen=True)
class TorsionGroup:
    """E(Q)_tors。structure は (n,) か (2, n)。"""

    structure: Tuple[int, ...]
    generators: Tuple[Point, ...]
    points: Tuple[Point, ...]

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def exponent(self) -> int:
        return self.structure[-1]


def _square_divisors(n: int) -> List[int]:
    """y^2 | n となる y >= 1。"""
    if n == 0:
        return []
    ys = [1]
    for p, e in factorint(abs(n)).items():
        ys = [y * p**k for y in ys for k in range(e // 2 + 1)]
    return sorted(ys)


def torsion_subgroup(curve: CurveQ) -> TorsionGroup:
    """Lutz-Nagell の定理によるねじれ部分群。"""
    _integral_ainvs(curve)
    a = -27 * int(curve.c4)
    b = -54 * int(curve.c6)
    big_x = Symbol("X")
    disc = 4 * a**3 + 27 * b * b
    found: Dict[Tuple[Fraction, Fraction], Point] = {}
    for yy in [0] + _square_divisors(disc):
        cubic = Poly(big_x**3 + a * big_x + b - yy * yy, big_x)
        for root in cubic.ground_roots():
            for sy in {yy, -yy}:
                x = Fraction(int(root) - 3 * int(curve.b2), 36)
                y = (Fraction(sy, 108) - curve.a1 * x - curve.a3) / 2
                pt = Point(x, y)
                if curve.contains(pt) and point_order(curve, pt) > 0:
                    found[(x, y)] = pt
    points = [Point.infinity()] + [found[k] for k in sorted(found)]
    orders = {pt: point_order(curve, pt) for pt in points}
    total = len(points)
    two_torsion = [pt for pt in points if orders[pt] == 2]
    if len(two_torsion) == 3:
        top = max(points, key=lambda pt: (orders[pt], str(pt)))
        multiples = {point_mul(curve, k, top) for k in range(orders[top])}
        other = next(pt for pt in two_torsion if pt not in multiples)
        return TorsionGroup((2, total // 2), (top, other), tuple(points))
    if total == 1:
        return TorsionGroup((1,), (), tuple(points))
    gen = next(pt for pt in points if orders[pt] == total)
    return TorsionGroup((total,), (gen,), tuple(points))
