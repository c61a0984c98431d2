"""特殊グラフのセンサス：Heegner 点の組、U のヘッケ軌道、Gamma と Sigma の交わり。

走査は三段階です。

1. 座標ごとの V-像（point ジョブ）
2. 組ごとの関係格子と分類（tuple / orbit ジョブ）
3. リンクから示唆された正次元の族の検査（family ジョブ）

各段階は CensusEngine で実行し、結果は (複雑さ, キー) 順に並べて報告にします。
"""

import asyncio
import functools
import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath

from .engine import CensusEngine
from .special import (
    GraphRecord,
    PointImage,
    SpecialDesc,
    classify_family,
    classify_images,
    classify_tuple,
    coordinate_label,
    exemplary_filter,
    hecke_orbit,
    hecke_special,
    heegner_points,
    point_image,
    relation_support,
    tuple_key,
)
from ..arith.modular import preload_modular_polynomials
from ..arith.quadforms import class_number
from ..config.loader import ScanConfig
from ..core.errors import InvalidInputError
from ..core.events import ScanJob, ScanOutcome
from ..curves.elliptic import (
    Point,
    add_unchecked,
    point_mul,
    point_order,
    require_on_curve,
    torsion_subgroup,
)
from ..curves.heights import empirical_eta
from ..curves.modparam import CorrespondenceSpec, heegner_point
from ..curves.periods import endomorphism_ring, weierstrass_point
from ..numerics.intrel import recognize_algebraic
from ..numerics.precision import format_real
from ..utils.logger import get_logger

logger = get_logger(__name__)

REPORT_VERSION = 1
GAMMA_ENUMERATION_LIMIT = 10**6


@dataclass
class CensusReport:
    """走査の報告。records は従属な記録（組と族）を (複雑さ, 種類, キー) 順に持つ。"""

    kind: str
    n: int
    records: List[GraphRecord]
    exemplary: List[GraphRecord]
    scanned: int
    independent: int
    indeterminate: List[Tuple[str, str]]
    torsion_images: List[Dict[str, Any]] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def dependent(self) -> List[GraphRecord]:
        return [r for r in self.records if r.kind == "tuple"]

    @property
    def anomalous(self) -> List[str]:
        return [r.key for r in self.records if r.anomalous]

    @property
    def d_star(self) -> int:
        """従属な組がすべて D-独立でなくなる最小の D。"""
        best = 0
        for record in self.dependent:
            sizes = [abs(f.disc) for f in record.special.fixed if f.disc]
            sizes += [link.degree for link in record.special.links]
            if sizes:
                best = max(best, min(sizes))
        return best

    @property
    def n_star(self) -> int:
        """見つかった関係の台の最大の大きさ + 1。"""
        largest = 0
        for record in self.dependent:
            cm = len(record.relations[0]) == 2 * record.n if record.relations else False
            for row in record.relations:
                largest = max(largest, len(relation_support(row, record.n, cm)))
        return largest + 1

    def to_dict(self) -> Dict[str, Any]:
        exemplary = {r.key for r in self.exemplary}
        records = []
        for record in self.records:
            entry = record.to_dict()
            entry["exemplary"] = record.key in exemplary
            records.append(entry)
        return {
            "kind": self.kind,
            "n": self.n,
            "records": records,
            "scanned": self.scanned,
            "independent": self.independent,
            "indeterminate": [{"key": k, "error": e} for k, e in self.indeterminate],
            "anomalous": self.anomalous,
            "d_star": self.d_star,
            "n_star": self.n_star,
            "torsion_images": self.torsion_images,
            "provenance": self.provenance,
        }


def point_job(cs: CorrespondenceSpec, job: ScanJob) -> ScanOutcome:
    ring = endomorphism_ring(cs.param.curve, cs.param.lattice)
    image = point_image(cs, job.payload[0], ring)
    return ScanOutcome(job.key, job.complexity, job.kind, (image,))


def tuple_job(cs: CorrespondenceSpec, config: ScanConfig, job: ScanJob) -> ScanOutcome:
    points, images = job.payload
    record, candidates = classify_tuple(cs, points, config, images)
    return ScanOutcome(job.key, job.complexity, job.kind, (record,), tuple(candidates))


def orbit_job(cs: CorrespondenceSpec, config: ScanConfig, job: ScanJob) -> ScanOutcome:
    points, images = job.payload
    special = hecke_special(points)
    record, candidates = classify_images(
        cs, special, points, job.complexity, config, images
    )
    return ScanOutcome(job.key, job.complexity, job.kind, (record,), tuple(candidates))


def family_job(cs: CorrespondenceSpec, config: ScanConfig, job: ScanJob) -> ScanOutcome:
    record = classify_family(cs, job.payload[0], job.complexity, config)
    records = (record,) if record is not None else ()
    return ScanOutcome(job.key, job.complexity, job.kind, records)


def trace_job(cs: CorrespondenceSpec, job: ScanJob) -> ScanOutcome:
    disc = job.payload[0]
    result = heegner_point(cs.param, disc)
    entry: Dict[str, Any] = {
        "disc": disc,
        "trace": None,
        "order": None,
        "torsion": None,
    }
    if result.trace_rational is not None:
        order = point_order(cs.param.curve, result.trace_rational)
        entry.update(
            trace=str(result.trace_rational), order=order, torsion=order > 0
        )
    return ScanOutcome(job.key, job.complexity, job.kind, extra=entry)


async def _point_images(
    engine: CensusEngine,
    cs: CorrespondenceSpec,
    points: Sequence,
    complexities: Sequence[int],
) -> Tuple[Dict[str, PointImage], List[Tuple[str, str]]]:
    jobs = [
        ScanJob(coordinate_label(p), c, "point", (p,))
        for p, c in zip(points, complexities)
    ]
    outcomes = await engine.run(jobs, functools.partial(point_job, cs))
    images = {o.key: o.records[0] for o in outcomes if not o.indeterminate}
    failed = [(o.key, o.error or "") for o in outcomes if o.indeterminate]
    return images, failed


def _tuple_jobs(
    kind: str,
    combos: Sequence[Tuple[Any, ...]],
    images: Dict[str, PointImage],
    complexity,
) -> Tuple[List[ScanJob], List[Tuple[str, str]]]:
    jobs, skipped = [], []
    for combo in combos:
        key = tuple_key(combo)
        labels = [coordinate_label(p) for p in combo]
        if any(label not in images for label in labels):
            skipped.append((key, "indeterminate: coordinate image not determined"))
            continue
        payload = (tuple(combo), tuple(images[label] for label in labels))
        jobs.append(ScanJob(key, complexity(combo), kind, payload))
    return jobs, skipped


async def _family_outcomes(
    engine: CensusEngine,
    cs: CorrespondenceSpec,
    config: ScanConfig,
    outcomes: Sequence[ScanOutcome],
) -> List[ScanOutcome]:
    candidates: Dict[str, Tuple[SpecialDesc, int]] = {}
    for outcome in outcomes:
        for special in outcome.candidates:
            key = special.key()
            if key not in candidates or outcome.complexity < candidates[key][1]:
                candidates[key] = (special, outcome.complexity)
    jobs = [
        ScanJob(key, complexity, "family", (special,))
        for key, (special, complexity) in candidates.items()
    ]
    if not jobs:
        return []
    return await engine.run(jobs, functools.partial(family_job, cs, config))


def _provenance(
    cs: CorrespondenceSpec, config: ScanConfig, kind: str, **extra: Any
) -> Dict[str, Any]:
    curve = cs.param.curve
    eta = empirical_eta(curve)
    provenance: Dict[str, Any] = {
        "version": REPORT_VERSION,
        "kind": kind,
        "curve": str(curve),
        "level": cs.param.level,
        "correspondence_degree": cs.degree,
        "component": "branch0",
        "prec": cs.param.prec,
        "detection_prec": cs.param.prec // 2,
        "bounds": config.model_dump(exclude={"workers"}),
        "independence": f"complete up to cap {config.coeff_cap}",
        "exemplary": "exemplary within bounds",
        "omega_exact": torsion_subgroup(curve).order,
        "eta_empirical": str(eta),
    }
    provenance.update(extra)
    return provenance


def _assemble(
    kind: str,
    config: ScanConfig,
    outcomes: Sequence[ScanOutcome],
    families: Sequence[ScanOutcome],
    failed: Sequence[Tuple[str, str]],
    provenance: Dict[str, Any],
    torsion_images: Optional[List[Dict[str, Any]]] = None,
) -> CensusReport:
    tuple_records = [r for o in outcomes for r in o.records]
    dependent = [r for r in tuple_records if r.dependent]
    family_records = [r for o in families for r in o.records]
    records = sorted(
        dependent + family_records, key=lambda r: (r.complexity, r.kind, r.key)
    )
    indeterminate = list(failed)
    indeterminate += [
        (o.key, o.error or "") for o in [*outcomes, *families] if o.indeterminate
    ]
    report = CensusReport(
        kind=kind,
        n=config.n,
        records=records,
        exemplary=exemplary_filter(records),
        scanned=len(outcomes),
        independent=len(tuple_records) - len(dependent),
        indeterminate=sorted(indeterminate),
        torsion_images=torsion_images or [],
        provenance=provenance,
    )
    logger.info(
        "%s: %d scanned, %d dependent, %d exemplary, %d indeterminate",
        kind,
        report.scanned,
        len(report.dependent),
        len(report.exemplary),
        len(report.indeterminate),
    )
    return report


async def scan_tuples_async(
    cs: CorrespondenceSpec,
    config: ScanConfig,
    engine: Optional[CensusEngine] = None,
    cache: Optional[Any] = None,
) -> CensusReport:
    engine = engine or CensusEngine(config.workers)
    # ワーカーはこのプロセスで読み込んだ Phi_N を引き継ぐ
    loaded = preload_modular_polynomials(config.isog_bound, cache)
    logger.debug("scan: Phi_1..Phi_%d loaded", loaded)
    points = heegner_points(cs.param.level, config.delta_max, cs.param.prec)
    images, failed = await _point_images(
        engine, cs, points, [abs(p.disc) for p in points]
    )
    combos = list(itertools.combinations_with_replacement(points, config.n))
    jobs, skipped = _tuple_jobs(
        "tuple", combos, images, lambda combo: max(abs(p.disc) for p in combo)
    )
    outcomes = await engine.run(jobs, functools.partial(tuple_job, cs, config))
    families = await _family_outcomes(engine, cs, config, outcomes)
    torsion_images: List[Dict[str, Any]] = []
    discs = sorted({p.disc for p in points}, reverse=True)
    if config.n == 1 and cs.degree == 1:
        traces = await engine.run(
            [ScanJob(f"trace:{d}", -d, "trace", (d,)) for d in discs],
            functools.partial(trace_job, cs),
        )
        torsion_images = [t.extra for t in traces if not t.indeterminate]
        failed += [(t.key, t.error or "") for t in traces if t.indeterminate]
    field_degree = 2 * max((class_number(d) for d in discs), default=0)
    provenance = _provenance(
        cs,
        config,
        "scan",
        heegner_points=len(points),
        field_degree=field_degree,
        torsion_shape=format_real(field_degree * mpmath.log(field_degree + 2)),
    )
    return _assemble(
        "scan", config, outcomes, families, failed + skipped, provenance, torsion_images
    )


def scan_tuples(
    cs: CorrespondenceSpec,
    config: ScanConfig,
    engine: Optional[CensusEngine] = None,
    cache: Optional[Any] = None,
) -> CensusReport:
    """|disc| <= delta_max の Heegner 点の n 組（置換を除く）をすべて分類する。"""
    return asyncio.run(scan_tuples_async(cs, config, engine, cache))


async def u_special_scan_async(
    cs: CorrespondenceSpec,
    u_points: Sequence,
    depth: int,
    config: ScanConfig,
    engine: Optional[CensusEngine] = None,
) -> CensusReport:
    if not u_points:
        raise InvalidInputError("U must contain at least one point")
    engine = engine or CensusEngine(config.workers)
    orbit = hecke_orbit(u_points, depth, cs.param.prec)
    images, failed = await _point_images(engine, cs, orbit, [p.level for p in orbit])
    combos = list(itertools.combinations_with_replacement(orbit, config.n))
    jobs, skipped = _tuple_jobs(
        "orbit", combos, images, lambda combo: max(p.level for p in combo)
    )
    outcomes = await engine.run(jobs, functools.partial(orbit_job, cs, config))
    families = await _family_outcomes(engine, cs, config, outcomes)
    provenance = _provenance(
        cs,
        config,
        "census-u",
        u_points=[mpmath.nstr(p.tau, 20) for p in orbit if p.level == 1],
        orbit_depth=depth,
        orbit_size=len(orbit),
    )
    return _assemble(
        "census-u", config, outcomes, families, failed + skipped, provenance
    )


def u_special_scan(
    cs: CorrespondenceSpec,
    u_points: Sequence,
    depth: int,
    config: ScanConfig,
    engine: Optional[CensusEngine] = None,
) -> CensusReport:
    """U のヘッケ軌道（次数 <= depth）の点の n 組を分類する。複雑さは U-複雑さ。"""
    return asyncio.run(u_special_scan_async(cs, u_points, depth, config, engine))


@dataclass
class GammaSigmaResult:
    """Gamma ∩ Sigma。excluded は次数 > 1 と認識された（有理点でない）像。"""

    matches: List[Dict[str, Any]]
    unresolved: List[str]
    excluded: List[str]
    sigma_size: int
    gamma_size: int
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.matches)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "gamma",
            "count": self.count,
            "matches": self.matches,
            "unresolved": self.unresolved,
            "excluded": self.excluded,
            "sigma_size": self.sigma_size,
            "gamma_size": self.gamma_size,
            "provenance": self.provenance,
        }


def gamma_elements(
    curve, generators: Sequence[Point], box: int
) -> Dict[Point, Tuple[int, ...]]:
    """sum c_i g_i（|c_i| <= box）。同じ点には最初に現れた係数を残す。"""
    require_on_curve(curve, *generators)
    if box < 0:
        raise InvalidInputError("coefficient box must be >= 0")
    size = (2 * box + 1) ** len(generators)
    if size > GAMMA_ENUMERATION_LIMIT:
        raise InvalidInputError(f"Gamma enumeration too large: {size} elements")
    multiples = [
        {c: point_mul(curve, c, g) for c in range(-box, box + 1)} for g in generators
    ]
    elements: Dict[Point, Tuple[int, ...]] = {}
    for coeffs in itertools.product(range(-box, box + 1), repeat=len(generators)):
        total = Point.infinity()
        for c, table in zip(coeffs, multiples):
            total = add_unchecked(curve, total, table[c])
        elements.setdefault(total, coeffs)
    return elements


async def gamma_sigma_intersection_async(
    cs: CorrespondenceSpec,
    generators: Sequence[Point],
    config: ScanConfig,
    engine: Optional[CensusEngine] = None,
) -> GammaSigmaResult:
    curve = cs.param.curve
    elements = gamma_elements(curve, generators, config.gamma_box)
    engine = engine or CensusEngine(config.workers)
    points = heegner_points(cs.param.level, config.delta_max, cs.param.prec)
    images, failed = await _point_images(
        engine, cs, points, [abs(p.disc) for p in points]
    )
    matches, unresolved, excluded = [], [key for key, _ in failed], []
    prec = cs.param.prec
    for point in points:
        label = coordinate_label(point)
        image = images.get(label)
        if image is None:
            continue
        if image.rational is None:
            x = _image_x(cs, image)
            poly = recognize_algebraic(x, prec // 2, 2 * class_number(point.disc))
            if poly is not None and poly.degree() > 1:
                excluded.append(label)
            else:
                unresolved.append(label)
            continue
        if image.rational in elements:
            matches.append(
                {
                    "key": label,
                    "disc": point.disc,
                    "point": str(image.rational),
                    "coefficients": list(elements[image.rational]),
                }
            )
    provenance = _provenance(
        cs, config, "gamma", generators=[str(g) for g in generators]
    )
    return GammaSigmaResult(
        matches,
        sorted(unresolved),
        sorted(excluded),
        len(points),
        len(elements),
        provenance,
    )


def _image_x(cs: CorrespondenceSpec, image: PointImage) -> mpmath.mpc:
    point = weierstrass_point(cs.param.curve, cs.param.lattice, image.values[0].value)
    return point.x


def gamma_sigma_intersection(
    cs: CorrespondenceSpec,
    generators: Sequence[Point],
    config: ScanConfig,
    engine: Optional[CensusEngine] = None,
) -> GammaSigmaResult:
    """Sigma（Heegner 点の V-像）と Gamma（生成元の整数結合）の交わり。"""
    return asyncio.run(gamma_sigma_intersection_async(cs, generators, config, engine))
