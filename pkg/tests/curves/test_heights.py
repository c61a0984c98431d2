"""標準高さと eta の推定のテスト。"""

from fractions import Fraction

from src.cmgraphs.curves.elliptic import Point, point_add, point_mul, point_neg
from src.cmgraphs.curves.heights import (
    canonical_height,
    empirical_eta,
    points_of_bounded_height,
)


class TestCanonicalHeight:
    def test_37a1_generator(self, curve_37a1):
        h = canonical_height(curve_37a1, Point(Fraction(0), Fraction(0)))
        assert abs(h.value - 0.0511114082) < 1e-6
        assert h.err < 1e-6

    def test_depths_agree(self, curve_37a1):
        p = Point(Fraction(0), Fraction(0))
        h8 = canonical_height(curve_37a1, p, depth=8)
        h10 = canonical_height(curve_37a1, p, depth=10)
        assert abs(h8.value - h10.value) < 1e-6

    def test_torsion_is_zero(self, curve_11a1):
        h = canonical_height(curve_11a1, Point(Fraction(5), Fraction(5)))
        assert h.value == 0

    def test_quadratic(self, curve_37a1):
        p = Point(Fraction(0), Fraction(0))
        h1 = canonical_height(curve_37a1, p).value
        h2 = canonical_height(curve_37a1, point_mul(curve_37a1, 2, p)).value
        assert abs(h2 - 4 * h1) < 1e-10

    def test_parallelogram_law(self, curve_389a1):
        p = Point(Fraction(0), Fraction(0))
        q = Point(Fraction(1), Fraction(0))
        s = point_add(curve_389a1, p, q)
        d = point_add(curve_389a1, p, point_neg(curve_389a1, q))

        def h(pt):
            return canonical_height(curve_389a1, pt).value

        assert abs(h(s) + h(d) - 2 * h(p) - 2 * h(q)) < 1e-8


class TestEmpiricalEta:
    def test_37a1(self, curve_37a1):
        eta = empirical_eta(curve_37a1, 10)
        assert eta.is_known
        assert abs(eta.value - 0.0511114082) < 1e-6

    def test_rank_zero_is_unknown(self, curve_11a1):
        eta = empirical_eta(curve_11a1, 10)
        assert not eta.is_known
        assert str(eta) == "unknown"

    def test_389a1_bounded_by_generators(self, curve_389a1):
        eta = empirical_eta(curve_389a1, 10)
        h1 = canonical_height(curve_389a1, Point(Fraction(0), Fraction(0))).value
        h2 = canonical_height(curve_389a1, Point(Fraction(1), Fraction(0))).value
        assert eta.value <= min(h1, h2) + 1e-12

    def test_search_finds_known_points(self, curve_37a1):
        found = points_of_bounded_height(curve_37a1, 4)
        assert Point(Fraction(1, 4), Fraction(-5, 8)) in found
        assert Point(Fraction(0), Fraction(0)) in found
