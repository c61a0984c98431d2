"""楕円対数の整数関係による関係格子。

点 x_1..x_n の楕円対数 z_i（CM なら rho z_i も）と omega1/t, omega2/t を並べて
整数関係を探し、

* sum m_i x_i = O となる m（RelationLattice.basis）
* sum m_i x_i がねじれ点になる m（ねじれを法とした関係）

の二つの格子を HNF で返します。有理点の関係は群演算で厳密に確かめます。
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import mpmath

from .masser import MasserInput, coefficient_bound
from ..core.errors import IndeterminateError, InvalidInputError
from ..curves.elliptic import (
    CurveQ,
    Point,
    add_unchecked,
    point_mul,
    point_order,
    require_on_curve,
    torsion_subgroup,
)
from ..curves.heights import EtaEstimate, canonical_height, empirical_eta
from ..curves.periods import (
    GUARD,
    EndRing,
    Lattice2,
    elliptic_log,
    endomorphism_ring,
    periods,
)
from ..numerics import DEFAULT_PREC
from ..numerics.intrel import integer_relation_basis
from ..numerics.lattice import IntMatrix, hnf_basis, lattice_intersection, saturate
from ..numerics.precision import PrecComplex
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_COEFF_CAP = 10**4
MAX_PREC = 4096


@dataclass(frozen=True)
class TorsionValue:
    """関係 sum m_i x_i が与えるねじれ点。

    point は有理点のとき、coords は格子座標 (u, v)（z = u omega1 + v omega2）。
    """

    order: int
    point: Optional[Point] = None
    coords: Optional[Tuple[Fraction, Fraction]] = None

    def __str__(self) -> str:
        if self.point is not None:
            return str(self.point)
        u, v = self.coords or (Fraction(0), Fraction(0))
        return f"{u}*w1+{v}*w2"


@dataclass(frozen=True)
class LogRelations:
    """relations_among_logs の結果。full の行は (m_1..m_k, k1, k2)。"""

    full: IntMatrix
    modulo_torsion: IntMatrix
    exact: IntMatrix
    torsion_exponent: int


def _entry_bound(bound: int, count: int, torsion_exponent: int) -> int:
    # 値は基本平行四辺形内なので |k_j| <= t * sum |m_i|
    return max(bound, torsion_exponent * count * bound + 1)


def _certify(
    row: Sequence[int],
    values: Sequence[PrecComplex],
    lattice: Lattice2,
    torsion_exponent: int,
) -> bool:
    """区間評価で |sum m_j v_j + (k1 omega1 + k2 omega2) / t| が誤差内か確かめる。"""
    k = len(values)
    m, k1, k2 = row[:k], row[k], row[k + 1]
    prec = min(v.prec for v in values) if values else lattice.prec
    with mpmath.workprec(prec + GUARD):
        total = mpmath.fsum(c * v.value for c, v in zip(m, values))
        period = k1 * lattice.omega1.value + k2 * lattice.omega2.value
        total += period / torsion_exponent
        tol = mpmath.fsum(abs(c) * v.err for c, v in zip(m, values))
        period_err = abs(k1) * lattice.omega1.err + abs(k2) * lattice.omega2.err
        tol += period_err / torsion_exponent
        tol += mpmath.ldexp(1, 16 - prec)
        return abs(total) <= tol


def relations_among_logs(
    values: Sequence[PrecComplex],
    lattice: Lattice2,
    bound: int,
    torsion_exponent: int = 1,
    prec: Optional[int] = None,
) -> LogRelations:
    """sum m_j v_j が (1/t) Lambda に入る整数ベクトル m の格子。

    検出は prec ビット（既定は値の精度の半分）で行い、見つかった関係はすべて
    値の精度での区間評価で確認します。確認できない関係があれば IndeterminateError。
    """
    if torsion_exponent < 1:
        raise InvalidInputError("torsion exponent must be positive")
    k = len(values)
    if k == 0:
        return LogRelations([], [], [], torsion_exponent)
    value_prec = min(min(v.prec for v in values), lattice.prec)
    prec = prec or value_prec // 2
    with mpmath.workprec(value_prec + GUARD):
        reduced = [
            PrecComplex.rounded(lattice.reduce(v.value), value_prec, v.err)
            for v in values
        ]
        columns = [v.value for v in reduced] + [
            lattice.omega1.value / torsion_exponent,
            lattice.omega2.value / torsion_exponent,
        ]
    full = integer_relation_basis(
        columns, prec, _entry_bound(bound, k, torsion_exponent)
    )
    for row in full:
        if not _certify(row, reduced, lattice, torsion_exponent):
            raise IndeterminateError(
                f"indeterminate at current precision: relation {row} "
                f"not confirmed at {value_prec} bits"
            )
    projected = [row[:k] for row in full if any(row[:k])]
    modulo_torsion = saturate(projected, k) if projected else []
    divisible = [[int(i == j) for j in range(k + 2)] for i in range(k)]
    divisible.append([0] * k + [torsion_exponent, 0])
    divisible.append([0] * k + [0, torsion_exponent])
    exact_full = lattice_intersection(full, divisible) if full else []
    exact_rows = [row[:k] for row in exact_full if any(row[:k])]
    exact = hnf_basis(exact_rows) if exact_rows else []
    return LogRelations(full, modulo_torsion, exact, torsion_exponent)


def _combine(curve: CurveQ, points: Sequence[Point], coeffs: Sequence[int]) -> Point:
    total = Point.infinity()
    for c, p in zip(coeffs, points):
        if c:
            total = add_unchecked(curve, total, point_mul(curve, c, p))
    return total


def _torsion_coords(
    curve: CurveQ, lattice: Lattice2, point: Point, order: int
) -> Tuple[Fraction, Fraction]:
    """位数 order のねじれ点の格子座標（分母 order の有理数に丸めて確認）。"""
    if point.is_infinity or order == 1:
        return Fraction(0), Fraction(0)
    z = elliptic_log(curve, lattice, point)
    u, v = lattice.coordinates(z.value)
    out = []
    with mpmath.workprec(lattice.prec):
        tol = mpmath.ldexp(1, -(lattice.prec // 4))
        for c in (u, v):
            scaled = c * order
            nearest = int(mpmath.nint(scaled))
            if abs(scaled - nearest) > tol:
                raise IndeterminateError(
                    f"indeterminate at current precision: {point} is not "
                    f"numerically of order {order}"
                )
            out.append(Fraction(nearest, order) % 1)
    return out[0], out[1]


def _apply_rho(
    ring: EndRing, coords: Tuple[Fraction, Fraction]
) -> Tuple[Fraction, Fraction]:
    (r11, r12), (r21, r22) = ring.action
    u, v = coords
    return (u * r11 + v * r21) % 1, (u * r12 + v * r22) % 1


def _cm_torsion_value(
    curve: CurveQ,
    points: Sequence[Point],
    coeffs: Sequence[int],
    ring: EndRing,
    lattice: Lattice2,
) -> Optional[TorsionValue]:
    """sum (a_i + b_i rho) x_i がねじれ点ならその値（A, B は有理点なので両方ねじれ点）。"""
    big_a = _combine(curve, points, coeffs[0::2])
    big_b = _combine(curve, points, coeffs[1::2])
    order_a, order_b = point_order(curve, big_a), point_order(curve, big_b)
    if order_a == 0 or order_b == 0:
        return None
    if order_b == 1:
        return TorsionValue(order_a, big_a)
    ua, va = _torsion_coords(curve, lattice, big_a, order_a)
    ub, vb = _apply_rho(ring, _torsion_coords(curve, lattice, big_b, order_b))
    coords = ((ua + ub) % 1, (va + vb) % 1)
    order = math.lcm(coords[0].denominator, coords[1].denominator)
    return TorsionValue(order, None, coords)


def torsion_value(
    curve: CurveQ,
    points: Sequence[Point],
    coeffs: Sequence[int],
    ring: Optional[EndRing] = None,
    lattice: Optional[Lattice2] = None,
) -> Optional[TorsionValue]:
    """sum m_i x_i をねじれ点として厳密に求める（ねじれ点でなければ None）。

    coeffs の長さが 2n なら (a_1, b_1, ..., a_n, b_n) で sum (a_i + b_i rho) x_i。
    """
    require_on_curve(curve, *points)
    n = len(points)
    if len(coeffs) == n:
        total = _combine(curve, points, coeffs)
        order = point_order(curve, total)
        return TorsionValue(order, total) if order else None
    if len(coeffs) != 2 * n:
        raise InvalidInputError(
            f"coefficient vector has length {len(coeffs)}, expected {n} or {2 * n}"
        )
    ring = ring or endomorphism_ring(curve)
    if not ring.is_cm:
        raise InvalidInputError("rho-coefficients given for a curve without CM")
    lattice = lattice or periods(curve, DEFAULT_PREC)
    return _cm_torsion_value(curve, points, coeffs, ring, lattice)


def verify_relation_exact(
    curve: CurveQ,
    points: Sequence[Point],
    coeffs: Sequence[int],
    torsion_target: Union[Point, TorsionValue, None] = None,
    ring: Optional[EndRing] = None,
    lattice: Optional[Lattice2] = None,
) -> bool:
    """sum m_i x_i == torsion_target（None は O）を厳密な群演算で判定する。

    CM の係数で B = sum b_i x_i が O でないときは、ねじれ点の格子座標を
    分母を固定した有理数として比較します（丸めが曖昧なら IndeterminateError）。
    """
    require_on_curve(curve, *points)
    target = torsion_target
    if target is None:
        target = Point.infinity()
    n = len(points)
    if len(coeffs) == n and isinstance(target, Point):
        return _combine(curve, points, coeffs) == target
    if len(coeffs) == n and target.point is not None:
        return _combine(curve, points, coeffs) == target.point
    value = torsion_value(curve, points, coeffs, ring, lattice)
    if value is None:
        return False
    if isinstance(target, Point):
        order = point_order(curve, target)
        if order == 0:
            return False
        target = TorsionValue(order, target)
    if value.point is not None and target.point is not None:
        return value.point == target.point
    lattice = lattice or periods(curve, DEFAULT_PREC)
    value_coords = value.coords or _torsion_coords(
        curve, lattice, value.point, value.order
    )
    target_coords = target.coords or _torsion_coords(
        curve, lattice, target.point, target.order
    )
    return value_coords == target_coords


@dataclass(frozen=True)
class RelationLattice:
    """点 x_1..x_n の関係格子。

    CM なら各行は (a_1, b_1, ..., a_n, b_n) で sum (a_i + b_i rho) x_i を表します。
    basis は sum = O となる関係の格子、basis_mod_torsion はねじれ点を法とした
    関係の格子で、torsion[i] は basis_mod_torsion[i] が与えるねじれ点
    （O なら None）。
    """

    n: int
    cm: bool
    basis: IntMatrix
    basis_mod_torsion: IntMatrix
    torsion: Tuple[Optional[TorsionValue], ...]
    coefficient_bound: int
    completeness: str
    prec: int
    q: mpmath.mpf
    eta: EtaEstimate

    @property
    def rank(self) -> int:
        """End(E) 上の階数（CM なら Z 上の階数の半分）。"""
        return len(self.basis) // 2 if self.cm else len(self.basis)

    @property
    def max_coefficient(self) -> int:
        # CM の ||a + b rho|| = max(|a|, |b|) も成分の最大値になる
        return max((abs(c) for row in self.basis for c in row), default=0)

    @property
    def completeness_label(self) -> str:
        if self.completeness == "cap":
            return f"complete up to cap {self.coefficient_bound}"
        return "complete"


def _required_prec(count: int, entry_bound: int) -> int:
    bits = 4 * count * math.log2(2 * entry_bound + 1) + 64
    return 64 * math.ceil(bits / 64)


def _point_logs(
    curve: CurveQ, points: Sequence[Point], ring: EndRing, lattice: Lattice2
) -> List[PrecComplex]:
    values = []
    prec = lattice.prec
    for p in points:
        z = elliptic_log(curve, lattice, p)
        values.append(z)
        if ring.is_cm:
            with mpmath.workprec(prec + GUARD):
                rho = ring.rho(prec + GUARD)
                rz = lattice.reduce(rho * z.value)
            values.append(PrecComplex.rounded(rz, prec, z.err * abs(rho)))
    return values


def relation_lattice(
    curve: CurveQ,
    points: Sequence[Point],
    prec: int = DEFAULT_PREC,
    coeff_cap: int = DEFAULT_COEFF_CAP,
    eta: Optional[EtaEstimate] = None,
    max_prec: int = MAX_PREC,
) -> RelationLattice:
    """有理点の End(E) 線形関係の格子を求め、全ての基底を厳密に検証して返す。

    係数の探索範囲は ceil(masser_bound)（q = 点の高さの最大値、eta = 経験的な
    高さの下限）。eta が分からない（探索範囲に非ねじれ点がない）ときは
    coeff_cap を使い、結果に "complete up to cap" の印を付けます。
    """
    if not points:
        raise InvalidInputError("at least one point is required")
    require_on_curve(curve, *points)
    n = len(points)
    ring = endomorphism_ring(curve)
    torsion = torsion_subgroup(curve)
    eta = eta or empirical_eta(curve)
    q = max(canonical_height(curve, p).value for p in points)
    if eta.is_known:
        mi = MasserInput(n, torsion.order, max(q, eta.value), eta.value, cm=ring.is_cm)
        bound, completeness = coefficient_bound(mi), "masser"
    else:
        bound, completeness = coeff_cap, "cap"
    count = 2 * n if ring.is_cm else n
    entry_bound = _entry_bound(bound, count, torsion.exponent)
    work_prec = max(prec, _required_prec(count + 2, entry_bound))
    if work_prec > max_prec:
        reason = "insufficient precision"
        if completeness == "cap":
            reason = "unbounded search"
        raise IndeterminateError(
            f"{reason}: coefficient bound {bound} needs {work_prec} bits "
            f"(max {max_prec})"
        )
    logger.info(
        "%s: %d points, bound %d (%s), working at %d bits",
        curve, n, bound, completeness, work_prec,
    )
    while True:
        try:
            return _relation_lattice_at(
                curve,
                points,
                ring,
                torsion.exponent,
                bound,
                completeness,
                work_prec,
                q,
                eta,
            )
        except IndeterminateError as exc:
            if 2 * work_prec > max_prec:
                raise
            logger.info("%s; retrying at %d bits", exc, 2 * work_prec)
            work_prec *= 2


def _relation_lattice_at(
    curve: CurveQ,
    points: Sequence[Point],
    ring: EndRing,
    torsion_exponent: int,
    bound: int,
    completeness: str,
    work_prec: int,
    q: mpmath.mpf,
    eta: EtaEstimate,
) -> RelationLattice:
    lattice = periods(curve, 2 * work_prec)
    values = _point_logs(curve, points, ring, lattice)
    found = relations_among_logs(values, lattice, bound, torsion_exponent, work_prec)
    annotations = []
    for row in found.modulo_torsion:
        value = torsion_value(curve, points, row, ring, lattice)
        if value is None or not verify_relation_exact(
            curve, points, row, value, ring, lattice
        ):
            raise IndeterminateError(
                f"indeterminate at current precision: relation {row} failed exact check"
            )
        annotations.append(None if value.order == 1 else value)
    for row in found.exact:
        if not verify_relation_exact(curve, points, row, None, ring, lattice):
            raise IndeterminateError(
                f"indeterminate at current precision: relation {row} is not exact"
            )
    return RelationLattice(
        n=len(points),
        cm=ring.is_cm,
        basis=found.exact,
        basis_mod_torsion=found.modulo_torsion,
        torsion=tuple(annotations),
        coefficient_bound=bound,
        completeness=completeness,
        prec=work_prec,
        q=q,
        eta=eta,
    )


@dataclass(frozen=True)
class CosetDesc:
    """点を含む最小のねじれ剰余類 B = B_0 + (位数 t の点)。"""

    relations: IntMatrix
    translate_order: int
    dim: int
    ambient: int

    @property
    def proper(self) -> bool:
        return self.dim < self.ambient


def smallest_torsion_coset(rl: RelationLattice, points: Sequence[Point]) -> CosetDesc:
    """dim B = n - rank、t は注釈されたねじれ点の位数の最小公倍数。"""
    if len(points) != rl.n:
        raise InvalidInputError(f"expected {rl.n} points, got {len(points)}")
    t = math.lcm(1, *(tv.order for tv in rl.torsion if tv is not None))
    return CosetDesc(rl.basis_mod_torsion, t, rl.n - rl.rank, rl.n)
