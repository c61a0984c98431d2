"""類数と高さの表、係数の増え方のテスト。"""

import math

import mpmath
import pytest

from src.cmgraphs.census.experiments import coefficient_growth, class_number_sweep
from src.cmgraphs.census.scan import CensusReport
from src.cmgraphs.core.errors import InvalidInputError

from .test_special import family_record, tuple_record


class TestSweep:
    def test_first_discriminants(self):
        table = class_number_sweep(4)
        assert [row.disc for row in table.rows] == [-3, -4]
        assert [row.class_number for row in table.rows] == [1, 1]
        assert table.degrees_ok
        assert table.rows[0].j_height == 0
        assert abs(table.rows[1].j_height - mpmath.log(1728)) < 1e-10
        assert table.rows[1].tau_height == 1

    def test_ratio(self):
        row = class_number_sweep(3, check_degree=False).rows[0]
        assert abs(row.ratio - 1 / math.sqrt(3)) < 1e-12
        assert row.degree_ok is None

    def test_skips_non_discriminants(self):
        discs = [row.disc for row in class_number_sweep(24, check_degree=False).rows]
        assert all(d % 4 in (0, 1) for d in discs)
        assert -23 in discs and -22 not in discs

    def test_trend(self):
        table = class_number_sweep(24, check_degree=False)
        trend = table.trend(buckets=2)
        assert [entry["upper"] for entry in trend] == [12, 24]
        # h(-23) = 3
        assert trend[1]["max_h"] == 3

    def test_to_dict(self):
        data = class_number_sweep(4).to_dict()
        assert data["kind"] == "sweep"
        assert data["rows"][0]["degree_ok"] is True

    def test_bound_too_small(self):
        with pytest.raises(InvalidInputError):
            class_number_sweep(2)


class TestCoefficientGrowth:
    def test_buckets(self):
        report = CensusReport(
            "scan", 2, [tuple_record(), family_record()], [], 1, 0, []
        )
        assert coefficient_growth(report, width=20) == [
            {"upper": 40, "records": 2, "max_coefficient": 1}
        ]

    def test_empty(self):
        report = CensusReport("scan", 1, [], [], 0, 0, [])
        assert coefficient_growth(report) == []

    def test_width(self):
        report = CensusReport("scan", 1, [], [], 0, 0, [])
        with pytest.raises(InvalidInputError):
            coefficient_growth(report, width=0)
