"""数値実験：類数と特異モジュライの高さの表、関係係数の増え方。

どちらも有限性の定理の「形」を見るためのもので、何かを証明するものではありません。
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import mpmath

from .scan import CensusReport
from ..arith.modular import height_of_quadratic_point, j_invariant
from ..arith.quadforms import hilbert_class_poly, reduced_forms, tau_of_form
from ..core.errors import InvalidInputError
from ..numerics.precision import format_real
from ..utils.logger import get_logger

logger = get_logger(__name__)

SWEEP_PREC = 128


@dataclass(frozen=True)
class SweepRow:
    """判別式 disc の一行。

    Attributes:
        class_number: h(disc)。
        ratio: h / |disc|^(1/2)。
        j_height: 特異モジュライの絶対対数高さ（H_disc のマーラー測度 / 次数）。
        tau_height: 簡約形式の根 tau の Weil 高さ H(tau) の最大値。
        degree_ok: deg H_disc == h(disc)（degree を調べなかったときは None）。
    """

    disc: int
    class_number: int
    ratio: mpmath.mpf
    j_height: mpmath.mpf
    tau_height: mpmath.mpf
    degree_ok: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "disc": self.disc,
            "class_number": self.class_number,
            "ratio": format_real(self.ratio, mpmath.mpf(10) ** -12),
            "j_height": format_real(self.j_height, mpmath.mpf(10) ** -12),
            "tau_height": format_real(self.tau_height, mpmath.mpf(10) ** -12),
            "degree_ok": self.degree_ok,
        }


@dataclass
class SweepTable:
    rows: List[SweepRow] = field(default_factory=list)

    @property
    def degrees_ok(self) -> bool:
        return all(r.degree_ok is not False for r in self.rows)

    def trend(self, buckets: int = 10) -> List[Dict[str, Any]]:
        """|disc| を等分した区間ごとの最大値（単調な傾向を見るための表）。"""
        if not self.rows:
            return []
        top = max(abs(r.disc) for r in self.rows)
        width = max(1, -(-top // buckets))
        table: Dict[int, Dict[str, Any]] = {}
        for row in self.rows:
            index = (abs(row.disc) - 1) // width
            entry = table.setdefault(
                index,
                {
                    "upper": (index + 1) * width,
                    "max_h": 0,
                    "max_j_height": mpmath.mpf(0),
                },
            )
            entry["max_h"] = max(entry["max_h"], row.class_number)
            entry["max_j_height"] = max(entry["max_j_height"], row.j_height)
        return [
            {**entry, "max_j_height": format_real(entry["max_j_height"], 1e-6)}
            for _, entry in sorted(table.items())
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "sweep",
            "rows": [r.to_dict() for r in self.rows],
            "trend": self.trend(),
            "degrees_ok": self.degrees_ok,
        }


def _j_height(forms, prec: int) -> mpmath.mpf:
    # H_d はモニックなので log M(H_d) = sum log max(1, |j(tau)|)
    with mpmath.workprec(prec):
        sizes = (abs(j_invariant(tau_of_form(f, prec), prec).value) for f in forms)
        total = mpmath.fsum(mpmath.log(max(mpmath.mpf(1), s)) for s in sizes)
        return total / len(forms)


def class_number_sweep(
    delta_bound: int,
    check_degree: bool = True,
    cache: Optional[Any] = None,
    prec: int = SWEEP_PREC,
) -> SweepTable:
    """-delta_bound <= disc <= -3 の全判別式について類数と高さを並べる。"""
    if delta_bound < 3:
        raise InvalidInputError("delta bound must be >= 3")
    table = SweepTable()
    for size in range(3, delta_bound + 1):
        disc = -size
        if disc % 4 not in (0, 1):
            continue
        forms = reduced_forms(disc)
        h = len(forms)
        with mpmath.workprec(prec):
            ratio = h / mpmath.sqrt(size)
            tau_height = max(
                height_of_quadratic_point(tau_of_form(f, 64)) for f in forms
            )
        degree_ok = None
        if check_degree:
            degree_ok = hilbert_class_poly(disc, cache=cache).degree() == h
            if not degree_ok:
                logger.error("deg H_%d != h(%d) = %d", disc, disc, h)
        table.rows.append(
            SweepRow(disc, h, ratio, _j_height(forms, prec), tau_height, degree_ok)
        )
    logger.info("sweep to -%d: %d discriminants", delta_bound, len(table.rows))
    return table


def coefficient_growth(report: CensusReport, width: int = 50) -> List[Dict[str, int]]:
    """複雑さの区間ごとに、従属な記録の関係係数の最大値を並べる。"""
    if width < 1:
        raise InvalidInputError("bucket width must be >= 1")
    buckets: Dict[int, Dict[str, int]] = {}
    for record in report.records:
        index = (record.complexity - 1) // width if record.complexity > 0 else 0
        entry = buckets.setdefault(
            index, {"upper": (index + 1) * width, "records": 0, "max_coefficient": 0}
        )
        entry["records"] += 1
        largest = max((abs(c) for row in record.relations for c in row), default=0)
        entry["max_coefficient"] = max(entry["max_coefficient"], largest)
    return [entry for _, entry in sorted(buckets.items())]
