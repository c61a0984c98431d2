"""Y^n の特殊部分多様体の記述と、V-像の関係による特殊グラフの分類。

SpecialDesc は固定された座標（CM 点またはヘッケ軌道の基点）と、
残りの座標の間の同種リンク tau_j = g tau_i（det g = N）で Y^n の特殊部分多様体を
表します。次元はリンクで結ばれた非固定座標の連結成分の数です。
"""

import math
import random
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath

from ..arith.modular import (
    MAX_MODPOLY_LEVEL,
    MobiusMap,
    in_XN,
    isogeny_matrices,
    reduce_to_fundamental_domain,
)
from ..arith.quadforms import (
    TauPoint,
    heegner_forms,
    tau_of_form,
    validate_discriminant,
)
from ..config.loader import ScanConfig
from ..core.errors import IndeterminateError, InvalidInputError
from ..curves.elliptic import Point
from ..curves.modparam import CorrespondenceSpec, recognize_rational_point, v_images
from ..curves.periods import GUARD, EndRing, Lattice2, endomorphism_ring
from ..numerics.lattice import IntMatrix, lattice_contains, lattice_intersection
from ..numerics.precision import PrecComplex, as_mpc
from ..relations.lattice import CosetDesc, relations_among_logs, torsion_value
from ..utils.logger import get_logger

logger = get_logger(__name__)

Matrix = Tuple[int, int, int, int]
IDENTITY: Matrix = (1, 0, 0, 1)


def _mobius(matrix: Matrix, tau):
    a, b, c, d = matrix
    return (a * tau + b) / (c * tau + d)


def _adjugate(matrix: Matrix) -> Matrix:
    a, b, c, d = matrix
    return (d, -b, -c, a)


def _matmul(g: Matrix, h: Matrix) -> Matrix:
    a, b, c, d = g
    e, f, k, m = h
    return (a * e + b * k, a * f + b * m, c * e + d * k, c * f + d * m)


def _primitive(matrix: Matrix) -> Matrix:
    g = math.gcd(*matrix)
    sign = -1 if next(x for x in matrix if x) < 0 else 1
    return tuple(sign * x // g for x in matrix)  # type: ignore[return-value]


@dataclass(frozen=True)
class Link:
    """tau_j = matrix . tau_i（行列式 degree の原始整数行列）。"""

    i: int
    j: int
    degree: int
    matrix: Matrix = IDENTITY

    def __post_init__(self) -> None:
        if not 1 <= self.degree <= MAX_MODPOLY_LEVEL:
            raise InvalidInputError(f"link degree {self.degree} out of supported range")
        a, b, c, d = self.matrix
        if a * d - b * c != self.degree:
            raise InvalidInputError(
                f"link matrix {self.matrix} has det != {self.degree}"
            )

    def __str__(self) -> str:
        return f"s{self.j}={self.matrix}.s{self.i} (N={self.degree})"


@dataclass(frozen=True)
class FixedCoordinate:
    """固定された座標。disc = 0 は CM でないヘッケ基点。"""

    index: int
    disc: int
    key: str
    tau: object = field(default=None, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.disc != 0:
            validate_discriminant(self.disc)


@dataclass(frozen=True)
class SpecialDesc:
    n: int
    fixed: Tuple[FixedCoordinate, ...] = ()
    links: Tuple[Link, ...] = ()

    def __post_init__(self) -> None:
        for link in self.links:
            if not (0 <= link.i < self.n and 0 <= link.j < self.n):
                raise InvalidInputError(f"link {link} outside 0..{self.n - 1}")

    @property
    def fixed_indices(self) -> Tuple[int, ...]:
        return tuple(sorted(f.index for f in self.fixed))

    def components(self) -> List[List[int]]:
        """リンクによる座標の連結成分（各成分は昇順、成分は先頭で整列）。"""
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for link in self.links:
            ri, rj = find(link.i), find(link.j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        groups: Dict[int, List[int]] = {}
        for x in range(self.n):
            groups.setdefault(find(x), []).append(x)
        return sorted(groups.values())

    @property
    def dim(self) -> int:
        fixed = set(self.fixed_indices)
        return sum(1 for comp in self.components() if not fixed.intersection(comp))

    def contains(self, other: "SpecialDesc") -> bool:
        """other ⊆ self（self の固定座標とリンクが other にもある）。"""
        if other.n != self.n:
            return False
        fixed = set(self.fixed) <= set(other.fixed)
        return fixed and set(self.links) <= set(other.links)

    def key(self) -> str:
        ordered = sorted(self.fixed, key=lambda f: f.index)
        fixed = ",".join(f"{f.index}:{f.key}" for f in ordered)
        links = ",".join(str(link) for link in self.links)
        return f"n={self.n};fixed=[{fixed}];links=[{links}]"

    def with_free(self, indices: Sequence[int]) -> "SpecialDesc":
        """indices の座標の固定を外した記述。"""
        drop = set(indices)
        kept = tuple(f for f in self.fixed if f.index not in drop)
        return SpecialDesc(self.n, kept, self.links)


def _point_tau(point, prec: int) -> mpmath.mpc:
    if isinstance(point, TauPoint):
        return tau_of_form(point.form, prec + GUARD).value.value
    if isinstance(point, OrbitPoint):
        return point.tau
    return as_mpc(point)


def _inverse(g: MobiusMap) -> MobiusMap:
    return MobiusMap(g.d, -g.b, -g.c, g.a)


def _boundary_variants(tau: mpmath.mpc) -> List[Tuple[mpmath.mpc, MobiusMap]]:
    """基本領域の境界で同一視される代表元 (tau', h)（tau' = h tau）。"""
    return [
        (tau, MobiusMap.identity()),
        (tau - 1, MobiusMap(1, -1, 0, 1)),
        (tau + 1, MobiusMap(1, 1, 0, 1)),
        (-1 / tau, MobiusMap(0, -1, 1, 0)),
    ]


def link_matrix(t1, t2, degree: int, prec: int) -> Optional[Matrix]:
    """t2 = g t1 となる行列式 degree の原始整数行列 g を探す（なければ None）。"""
    with mpmath.workprec(prec + GUARD):
        tau1, tau2 = as_mpc(t1), as_mpc(t2)
        r2, g2 = reduce_to_fundamental_domain(tau2, prec)
        tol = mpmath.ldexp(1, -(prec // 2))
        for a, b, d in isogeny_matrices(degree):
            image = (a * tau1 + b) / d
            r1, g1 = reduce_to_fundamental_domain(image, prec)
            for moved, h in _boundary_variants(r1.value):
                if abs(moved - r2.value) < tol:
                    gamma = _inverse(g2).compose(h).compose(g1)
                    upper = (a, b, 0, d)
                    total = _matmul((gamma.a, gamma.b, gamma.c, gamma.d), upper)
                    return _primitive(total)
    return None


def special_closure_Y(
    points: Sequence[TauPoint],
    isogeny_bound: int,
    prec: int = 256,
    cache: Optional[Any] = None,
) -> SpecialDesc:
    """CM 点の組を 0 次元の SpecialDesc にし、検出した X_N リンクを付ける。

    各組 (i, j) について N <= isogeny_bound の最小の N だけを記録します。
    """
    if isogeny_bound < 1:
        raise InvalidInputError("isogeny bound must be >= 1")
    top = min(isogeny_bound, MAX_MODPOLY_LEVEL)
    fixed = tuple(
        FixedCoordinate(i, p.disc, str(p.form), p) for i, p in enumerate(points)
    )
    links = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            for level in range(1, top + 1):
                if not in_XN(points[i], points[j], level, prec, cache):
                    continue
                t1 = _point_tau(points[i], prec)
                t2 = _point_tau(points[j], prec)
                matrix = link_matrix(t1, t2, level, prec)
                if matrix is None:
                    logger.debug(
                        "X_%d relation between %d, %d without a tau-matrix",
                        level,
                        i,
                        j,
                    )
                    continue
                links.append(Link(i, j, level, matrix))
                break
    return SpecialDesc(len(points), fixed, tuple(links))


def image_logs(
    cs: CorrespondenceSpec, taus: Sequence, ring: EndRing
) -> List[PrecComplex]:
    """各座標の V-像（対応の第0枝）の楕円対数。CM なら rho z も並べる。"""
    prec = cs.param.prec
    values = []
    for tau in taus:
        z = v_images(cs, tau, prec)[0].value.z
        values.extend(_with_rho(z, cs.param.lattice, ring, prec))
    return values


def _with_rho(
    z: PrecComplex, lattice: Lattice2, ring: EndRing, prec: int
) -> List[PrecComplex]:
    if not ring.is_cm:
        return [z]
    with mpmath.workprec(prec + GUARD):
        rho = ring.rho(prec + GUARD)
        rz = lattice.reduce(rho * z.value)
    return [z, PrecComplex.rounded(rz, prec, z.err * abs(rho))]


@dataclass(frozen=True)
class PointImage:
    """座標一つの V-像（第0枝）：楕円対数の列と、有理点なら厳密な点。"""

    label: str
    values: Tuple[PrecComplex, ...]
    rational: Optional[Point]


def point_image(cs: CorrespondenceSpec, point, ring: EndRing) -> PointImage:
    prec = cs.param.prec
    value = v_images(cs, _point_tau(point, prec), prec)[0].value
    rational = recognize_rational_point(cs.param.curve, value.point, prec)
    logs = _with_rho(value.z, cs.param.lattice, ring, prec)
    return PointImage(coordinate_label(point), tuple(logs), rational)


def _translate_order(
    row: Sequence[int], values: Sequence[PrecComplex], lattice: Lattice2, limit: int
) -> int:
    """sum m_j v_j が位数 r <= limit のねじれ点になる最小の r（見つからなければ 0）。"""
    prec = min(v.prec for v in values)
    with mpmath.workprec(prec + GUARD):
        total = mpmath.fsum(c * v.value for c, v in zip(row, values))
        tol = mpmath.ldexp(1, -(prec // 4))
        for r in range(1, limit + 1):
            if lattice.contains(total * r, tol):
                return r
    return 0


def coset_from_logs(
    values: Sequence[PrecComplex],
    lattice: Lattice2,
    n: int,
    cm: bool,
    coeff_cap: int,
    torsion_exponent: int = 1,
) -> CosetDesc:
    """数値の V-像から、ねじれを法とした関係格子と剰余類を作る。"""
    prec = min(v.prec for v in values)
    found = relations_among_logs(
        values, lattice, coeff_cap, torsion_exponent, prec // 2
    )
    rows = found.modulo_torsion
    limit = max(12, coeff_cap * torsion_exponent)
    orders = [_translate_order(row, values, lattice, limit) for row in rows]
    if any(order == 0 for order in orders):
        raise IndeterminateError(
            "indeterminate at current precision: torsion order of a relation not found"
        )
    rank = len(rows) // 2 if cm else len(rows)
    return CosetDesc(rows, math.lcm(1, *orders), n - rank, n)


def sample_taus(
    special: SpecialDesc, rng: random.Random, prec: int
) -> List[mpmath.mpc]:
    """自由な成分に一般の点を取り、リンクで他の座標に運ぶ。"""
    fixed = {f.index: f for f in special.fixed}
    adjacency: Dict[int, List[Tuple[int, Matrix]]] = {i: [] for i in range(special.n)}
    for link in special.links:
        adjacency[link.i].append((link.j, link.matrix))
        adjacency[link.j].append((link.i, _adjugate(link.matrix)))
    taus: List[Optional[mpmath.mpc]] = [None] * special.n
    with mpmath.workprec(prec + GUARD):
        for comp in special.components():
            anchors = [i for i in comp if i in fixed]
            if anchors:
                root = anchors[0]
                taus[root] = _point_tau(fixed[root].tau, prec)
            else:
                root = comp[0]
                taus[root] = mpmath.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.6))
            queue = [root]
            while queue:
                i = queue.pop(0)
                for j, matrix in adjacency[i]:
                    if taus[j] is None:
                        taus[j] = _mobius(matrix, taus[i])
                        queue.append(j)
    return [t for t in taus if t is not None]


def _intersect_all(lattices: Sequence[IntMatrix]) -> IntMatrix:
    if not lattices:
        return []
    current = lattices[0]
    for other in lattices[1:]:
        if not current or not other:
            return []
        current = lattice_intersection(current, other)
    return current


def family_dependence_test(
    cs: CorrespondenceSpec,
    special: SpecialDesc,
    samples: int = 4,
    coeff_cap: int = 10,
    torsion_exponent: int = 1,
    seed: int = 0,
) -> Optional[CosetDesc]:
    """S の一般の点の V-像が満たす関係の格子（標本ごとの格子の交わり）。

    最初の samples-1 個の交わりと全体の交わりが一致しなければ IndeterminateError。
    関係がなければ None。
    """
    if special.dim < 1:
        raise InvalidInputError("family test needs a positive-dimensional S")
    if samples < 2:
        raise InvalidInputError("at least two samples are required")
    ring = endomorphism_ring(cs.param.curve, cs.param.lattice)
    lattice = cs.param.lattice
    rng = random.Random(f"{seed}:{special.key()}")
    cosets = []
    first_values: List[PrecComplex] = []
    for k in range(samples):
        taus = sample_taus(special, rng, cs.param.prec)
        values = image_logs(cs, taus, ring)
        if k == 0:
            first_values = values
        found = relations_among_logs(
            values, lattice, coeff_cap, torsion_exponent, cs.param.prec // 2
        )
        cosets.append(found.modulo_torsion)
    stable = _intersect_all(cosets)
    if stable != _intersect_all(cosets[:-1]):
        raise IndeterminateError(
            f"indeterminate: family lattice not stable over {samples} samples"
        )
    if not stable:
        return None
    limit = max(12, coeff_cap * torsion_exponent)
    orders = [_translate_order(row, first_values, lattice, limit) for row in stable]
    if any(order == 0 for order in orders):
        raise IndeterminateError("indeterminate: family translate is not torsion")
    rank = len(stable) // 2 if ring.is_cm else len(stable)
    logger.debug("family %s: relations %s, orders %s", special.key(), stable, orders)
    return CosetDesc(stable, math.lcm(1, *orders), special.n - rank, special.n)


@dataclass(frozen=True)
class GraphRecord:
    """特殊グラフ W の記録（S 上のグラフなので dim W = dim S）。

    coset が None なら B = E^n（関係なし）。verified は関係の確かめ方で、
    "exact"（V-像が有理点で群演算により確認）か "numeric"（区間評価のみ）。
    """

    special: SpecialDesc
    degree: int
    key: str
    complexity: int
    coset: Optional[CosetDesc]
    dim_w: int
    kind: str = "tuple"
    coordinates: Tuple[str, ...] = ()
    witness: Tuple[str, ...] = ()
    verified: str = "numeric"
    anomalous: bool = False
    component: str = "branch0"

    @property
    def n(self) -> int:
        return self.special.n

    @property
    def dim_s(self) -> int:
        return self.special.dim

    @property
    def dim_b(self) -> int:
        return self.coset.dim if self.coset is not None else self.n

    @property
    def relations(self) -> IntMatrix:
        return self.coset.relations if self.coset is not None else []

    @property
    def translate_order(self) -> int:
        return self.coset.translate_order if self.coset is not None else 1

    @property
    def dependent(self) -> bool:
        return self.coset is not None and self.coset.proper

    def to_dict(self) -> Dict[str, object]:
        return {
            "key": self.key,
            "kind": self.kind,
            "complexity": self.complexity,
            "special": self.special.key(),
            "coordinates": list(self.coordinates),
            "dim_s": self.dim_s,
            "dim_b": self.dim_b,
            "dim_w": self.dim_w,
            "defect": defect(self),
            "relations": [list(row) for row in self.relations],
            "translate_order": self.translate_order,
            "verified": self.verified,
            "witness": list(self.witness),
            "anomalous": self.anomalous,
            "component": self.component,
        }


def defect(gr: GraphRecord) -> int:
    """delta(W) = dim S + dim B - dim W。"""
    if not 0 <= gr.dim_w <= gr.dim_s or not 0 <= gr.dim_b <= gr.n:
        raise InvalidInputError(
            f"inconsistent record {gr.key}: dim S={gr.dim_s}, "
            f"dim B={gr.dim_b}, dim W={gr.dim_w}"
        )
    return gr.dim_s + gr.dim_b - gr.dim_w


def _same_lattice(a: IntMatrix, b: IntMatrix) -> bool:
    return all(lattice_contains(a, row) for row in b) and all(
        lattice_contains(b, row) for row in a
    )


def _dominates(big: GraphRecord, small: GraphRecord) -> bool:
    """big の S が small の S を真に含み、big の B が small の B に入るか。"""
    if big.special.dim <= small.special.dim:
        return False
    if not big.special.contains(small.special):
        return False
    if not all(lattice_contains(big.relations, row) for row in small.relations):
        return False
    if _same_lattice(big.relations, small.relations):
        return big.translate_order == small.translate_order
    return True


def exemplary_filter(records: Sequence[GraphRecord]) -> List[GraphRecord]:
    """より大きな特殊グラフに支配される記録を取り除く（順序は保つ）。"""
    if not records:
        return []
    n, degree = records[0].n, records[0].degree
    if any(r.n != n or r.degree != degree for r in records):
        raise InvalidInputError("records must share n and the correspondence")
    kept = []
    for record in records:
        if any(_dominates(other, record) for other in records if other is not record):
            logger.debug("record %s is dominated", record.key)
            continue
        kept.append(record)
    return kept


def heegner_points(level: int, delta_max: int, prec: int = 256) -> List[TauPoint]:
    """|disc| <= delta_max の Heegner 形式の点を (|disc|, 形式) 順に並べる。"""
    if delta_max < 1:
        raise InvalidInputError("delta_max must be >= 1")
    points = []
    for size in range(3, delta_max + 1):
        disc = -size
        if disc % 4 not in (0, 1):
            continue
        for form in heegner_forms(disc, level):
            points.append(tau_of_form(form, prec))
    return points


def coordinate_label(point) -> str:
    if isinstance(point, TauPoint):
        return f"{point.disc}:{point.form}"
    if isinstance(point, OrbitPoint):
        return point.label
    return mpmath.nstr(as_mpc(point), 20)


def tuple_key(points: Sequence) -> str:
    return ";".join(coordinate_label(p) for p in points)


def relation_support(row: Sequence[int], n: int, cm: bool) -> Tuple[int, ...]:
    """関係の行が使う座標（CM なら (a_i, b_i) の組で数える）。"""
    if cm:
        return tuple(i for i in range(n) if row[2 * i] or row[2 * i + 1])
    return tuple(i for i in range(n) if row[i])


def _verify_exact(
    cs: CorrespondenceSpec,
    rational: Sequence[Optional[Point]],
    coset: CosetDesc,
    ring: EndRing,
) -> str:
    """V-像がすべて有理点なら各関係を群演算で確かめる。"""
    if any(p is None for p in rational):
        return "numeric"
    points = [p for p in rational if p is not None]
    for row in coset.relations:
        value = torsion_value(cs.param.curve, points, row, ring, cs.param.lattice)
        if value is None:
            raise IndeterminateError(
                f"indeterminate at current precision: relation {row} "
                "fails the exact check"
            )
    return "exact"


def structural_witnesses(
    special: SpecialDesc,
    coset: CosetDesc,
    cm: bool,
    small_disc: int = 0,
) -> Tuple[str, ...]:
    """関係を説明する構造（ねじれ像、同種リンク、小さい判別式の座標）。

    ``small_disc`` 以下の |判別式| を持つ固定座標が関係に現れれば
    ``disc:s_i`` を返します。
    """
    supports = [relation_support(row, special.n, cm) for row in coset.relations]
    used = {i for support in supports for i in support}
    found = set()
    for support in supports:
        if len(support) == 1:
            found.add(f"torsion:s{support[0]}")
    for f in special.fixed:
        if f.disc != 0 and abs(f.disc) <= small_disc and f.index in used:
            found.add(f"disc:s{f.index}")
    for link in special.links:
        if any(link.i in s and link.j in s for s in supports):
            found.add(f"link:{link}")
    return tuple(sorted(found))


def classify_tuple(
    cs: CorrespondenceSpec,
    points: Sequence[TauPoint],
    config: ScanConfig,
    images: Optional[Sequence[PointImage]] = None,
) -> Tuple[GraphRecord, List[SpecialDesc]]:
    """組の V-像の関係を求め、記録と族の候補（リンクで結ばれた成分）を返す。

    images を渡せば座標ごとの V-像の計算を省きます。
    """
    if not points or not all(isinstance(p, TauPoint) for p in points):
        raise InvalidInputError("classify_tuple needs TauPoint coordinates")
    special = special_closure_Y(points, config.isog_bound, cs.param.prec)
    complexity = max(abs(p.disc) for p in points)
    return classify_images(cs, special, points, complexity, config, images)


def classify_images(
    cs: CorrespondenceSpec,
    special: SpecialDesc,
    points: Sequence,
    complexity: int,
    config: ScanConfig,
    images: Optional[Sequence[PointImage]] = None,
) -> Tuple[GraphRecord, List[SpecialDesc]]:
    ring = endomorphism_ring(cs.param.curve, cs.param.lattice)
    if images is None:
        images = [point_image(cs, p, ring) for p in points]
    coset = coset_from_logs(
        [v for image in images for v in image.values],
        cs.param.lattice,
        len(points),
        ring.is_cm,
        config.coeff_cap,
        config.torsion_exponent,
    )
    key = tuple_key(points)
    labels = tuple(image.label for image in images)
    if not coset.proper:
        record = GraphRecord(
            special, cs.degree, key, complexity, coset, 0, "tuple", labels
        )
        return record, []
    rational = [image.rational for image in images]
    verified = _verify_exact(cs, rational, coset, ring)
    witness = structural_witnesses(special, coset, ring.is_cm, config.small_disc)
    record = GraphRecord(
        special,
        cs.degree,
        key,
        complexity,
        coset,
        0,
        "tuple",
        labels,
        witness,
        verified,
        anomalous=not witness,
    )
    if record.anomalous:
        logger.warning(
            "anomalous dependent tuple %s: relations %s", key, coset.relations
        )
    candidates = [
        special.with_free(comp) for comp in special.components() if len(comp) >= 2
    ]
    return record, candidates


def classify_family(
    cs: CorrespondenceSpec, special: SpecialDesc, complexity: int, config: ScanConfig
) -> Optional[GraphRecord]:
    """族 S の一般の点で関係を調べ、従属なら族の記録を返す。"""
    coset = family_dependence_test(
        cs,
        special,
        config.samples,
        config.coeff_cap,
        config.torsion_exponent,
        config.seed,
    )
    if coset is None or not coset.proper:
        return None
    cm = endomorphism_ring(cs.param.curve, cs.param.lattice).is_cm
    witness = structural_witnesses(special, coset, cm, config.small_disc)
    return GraphRecord(
        special,
        cs.degree,
        special.key(),
        complexity,
        coset,
        special.dim,
        "family",
        tuple(f"s{f.index}:{f.key}" for f in special.fixed),
        witness,
        "numeric",
        anomalous=not witness,
    )


@dataclass(frozen=True)
class OrbitPoint:
    """U の基点 base のヘッケ軌道の点 tau = matrix . u_base（det = level）。"""

    base: int
    matrix: Matrix
    level: int
    tau: mpmath.mpc = field(compare=False, hash=False)

    @property
    def label(self) -> str:
        return f"u{self.base}:{self.matrix}"


def hecke_orbit(u_points: Sequence, depth: int, prec: int = 256) -> List[OrbitPoint]:
    """各 u の N <= depth のヘッケ軌道（depth = 0 なら u 自身だけ）。"""
    if depth < 0:
        raise InvalidInputError("orbit depth must be >= 0")
    if depth > MAX_MODPOLY_LEVEL:
        raise InvalidInputError(f"orbit depth {depth} out of supported range")
    orbit = []
    with mpmath.workprec(prec + GUARD):
        for base, u in enumerate(u_points):
            tau = _point_tau(u, prec)
            if tau.imag <= 0:
                raise InvalidInputError(f"not in upper half plane: {u}")
            for level in range(1, max(1, depth) + 1):
                for a, b, d in isogeny_matrices(level):
                    image = (a * tau + b) / d
                    orbit.append(OrbitPoint(base, (a, b, 0, d), level, image))
    return orbit


def hecke_special(points: Sequence[OrbitPoint]) -> SpecialDesc:
    """軌道点の組の SpecialDesc。同じ基点の座標を M_j adj(M_i) でつなぐ。"""
    fixed = tuple(FixedCoordinate(i, 0, p.label, p.tau) for i, p in enumerate(points))
    links = []
    for i, first in enumerate(points):
        for j in range(i + 1, len(points)):
            second = points[j]
            if first.base != second.base:
                continue
            matrix = _primitive(_matmul(second.matrix, _adjugate(first.matrix)))
            a, b, c, d = matrix
            degree = a * d - b * c
            if 1 <= degree <= MAX_MODPOLY_LEVEL:
                links.append(Link(i, j, degree, matrix))
    return SpecialDesc(len(points), fixed, tuple(links))
