"""Masser の係数上界のテスト。"""

import itertools

import mpmath
import pytest

from src.cmgraphs.core.errors import InvalidInputError
from src.cmgraphs.relations.masser import MasserInput, coefficient_bound, masser_bound


class TestMasserBound:
    def test_single_point_is_omega(self):
        assert masser_bound(MasserInput(1, 1, 3, 3)) == 1
        assert masser_bound(MasserInput(1, 7, 2, 2)) == 7

    def test_two_points(self):
        """2^1 * 5 * 4^(1/2) = 20"""
        value = masser_bound(MasserInput(2, 5, mpmath.mpf(4), mpmath.mpf(1)))
        assert abs(value - 20) < 1e-20
        assert coefficient_bound(MasserInput(2, 5, mpmath.mpf(4), mpmath.mpf(1))) == 20

    def test_cm_variant(self):
        """CM では (2n)^(2n-1) omega (q/eta)^((2n-1)/2): 2 * 2 * 3 = 12"""
        value = masser_bound(MasserInput(1, 2, mpmath.mpf(9), mpmath.mpf(1), cm=True))
        assert abs(value - 12) < 1e-20

    def test_ceiling(self):
        mi = MasserInput(2, 1, mpmath.mpf(2), mpmath.mpf(1))
        # 2 * sqrt(2) = 2.83
        assert coefficient_bound(mi) == 3

    def test_monotone(self):
        grid = [mpmath.mpf(x) for x in ("0.5", "1", "2.5", "7")]
        for n, cm in itertools.product((1, 2, 3), (False, True)):
            for eta, q1, q2 in itertools.product(grid, grid, grid):
                if q1 < eta or q2 < q1:
                    continue
                low = masser_bound(MasserInput(n, 2, q1, eta, cm))
                assert masser_bound(MasserInput(n, 2, q2, eta, cm)) >= low
                assert masser_bound(MasserInput(n, 3, q1, eta, cm)) >= low
                assert masser_bound(MasserInput(n, 2, q1, eta / 2, cm)) >= low

    def test_q_below_eta(self):
        with pytest.raises(InvalidInputError):
            MasserInput(2, 1, mpmath.mpf(1), mpmath.mpf(2))

    @pytest.mark.parametrize("n,omega", [(0, 1), (1, 0)])
    def test_invalid_counts(self, n, omega):
        with pytest.raises(InvalidInputError):
            MasserInput(n, omega, 1, 1)
