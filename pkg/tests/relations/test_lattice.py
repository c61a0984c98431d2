"""関係格子・厳密検証・ねじれ剰余類のテスト。"""

import itertools
import random
from fractions import Fraction

import mpmath
import pytest

from src.cmgraphs.core.errors import InvalidInputError
from src.cmgraphs.curves.elliptic import CurveQ, Point, point_mul
from src.cmgraphs.curves.heights import EtaEstimate, empirical_eta
from src.cmgraphs.curves.periods import elliptic_log, periods
from src.cmgraphs.numerics.lattice import hnf_basis, lattice_contains
from src.cmgraphs.numerics.precision import PrecComplex
from src.cmgraphs.relations.lattice import (
    RelationLattice,
    TorsionValue,
    relation_lattice,
    relations_among_logs,
    smallest_torsion_coset,
    torsion_value,
    verify_relation_exact,
)

P37 = Point(Fraction(0), Fraction(0))
T11 = Point(Fraction(5), Fraction(5))


class TestRelationsAmongLogs:
    def test_planted_double(self, curve_37a1):
        lattice = periods(curve_37a1, 256)
        z = elliptic_log(curve_37a1, lattice, P37)
        double = PrecComplex.rounded(z.value * 2, z.prec, 2 * z.err)
        found = relations_among_logs([z, double], lattice, bound=10)
        assert found.modulo_torsion == [[2, -1]]
        assert found.exact == [[2, -1]]

    def test_half_period(self, curve_37a1):
        lattice = periods(curve_37a1, 256)
        half = PrecComplex.rounded(lattice.omega1.value / 2, 256, lattice.omega1.err)
        found = relations_among_logs([half], lattice, bound=10, torsion_exponent=2)
        assert found.modulo_torsion == [[1]]
        assert found.exact == [[2]]

    def test_independent(self, curve_389a1):
        lattice = periods(curve_389a1, 256)
        values = [
            elliptic_log(curve_389a1, lattice, Point(Fraction(0), Fraction(0))),
            elliptic_log(curve_389a1, lattice, Point(Fraction(1), Fraction(0))),
        ]
        found = relations_among_logs(values, lattice, bound=10)
        assert found.modulo_torsion == []
        assert found.exact == []

    def test_empty(self, curve_37a1):
        found = relations_among_logs([], periods(curve_37a1, 128), bound=5)
        assert found.full == []


class TestVerifyRelationExact:
    def test_zero_vector(self, curve_37a1):
        assert verify_relation_exact(curve_37a1, [P37], [0], Point.infinity())

    def test_five_torsion(self, curve_11a1):
        assert verify_relation_exact(curve_11a1, [T11], [5])
        assert not verify_relation_exact(curve_11a1, [T11], [1])

    def test_torsion_target(self, curve_11a1):
        target = Point(Fraction(16), Fraction(-61))
        assert verify_relation_exact(curve_11a1, [T11], [2], target)
        assert verify_relation_exact(curve_11a1, [T11], [2], TorsionValue(5, target))
        assert not verify_relation_exact(curve_11a1, [T11], [3], target)

    def test_distinct_points(self, curve_389a1):
        points = [Point(Fraction(0), Fraction(0)), Point(Fraction(1), Fraction(0))]
        assert not verify_relation_exact(curve_389a1, points, [1, -1])

    def test_planted_multiple(self, curve_37a1):
        double = point_mul(curve_37a1, 2, P37)
        assert verify_relation_exact(curve_37a1, [P37, double], [2, -1])
        assert not verify_relation_exact(curve_37a1, [P37, double], [1, -1])

    def test_rho_action(self, curve_32a):
        """y^2 = x^3 - x で [i](1, 0) = (-1, 0)。"""
        one = Point(Fraction(1), Fraction(0))
        target = Point(Fraction(-1), Fraction(0))
        assert verify_relation_exact(curve_32a, [one], [0, 1], target)
        assert not verify_relation_exact(curve_32a, [one], [0, 1], one)

    def test_wrong_length(self, curve_37a1):
        with pytest.raises(InvalidInputError):
            verify_relation_exact(curve_37a1, [P37], [1, 2, 3])

    def test_rho_without_cm(self, curve_37a1):
        with pytest.raises(InvalidInputError):
            torsion_value(curve_37a1, [P37], [1, 1])

    def test_point_not_on_curve(self, curve_37a1):
        with pytest.raises(InvalidInputError):
            verify_relation_exact(curve_37a1, [Point(Fraction(3), Fraction(3))], [1])


class TestRelationLattice:
    def test_planted_double(self, curve_37a1):
        double = point_mul(curve_37a1, 2, P37)
        rl = relation_lattice(curve_37a1, [P37, double])
        assert rl.basis == [[2, -1]]
        assert rl.basis_mod_torsion == [[2, -1]]
        assert rl.torsion == (None,)
        assert rl.rank == 1
        assert rl.completeness == "masser"
        assert rl.completeness_label == "complete"

    def test_five_torsion(self, curve_11a1):
        rl = relation_lattice(curve_11a1, [T11], coeff_cap=100)
        assert rl.basis == [[5]]
        assert rl.basis_mod_torsion == [[1]]
        assert rl.rank == 1
        assert rl.torsion[0].order == 5
        assert rl.torsion[0].point == T11
        assert rl.completeness_label == "complete up to cap 100"

    def test_independent_pair(self, curve_389a1):
        points = [Point(Fraction(0), Fraction(0)), Point(Fraction(1), Fraction(0))]
        rl = relation_lattice(curve_389a1, points)
        assert rl.basis == []
        assert rl.basis_mod_torsion == []
        assert rl.rank == 0

    def test_every_relation_verifies(self, curve_37a1):
        points = [P37, point_mul(curve_37a1, 3, P37), point_mul(curve_37a1, -2, P37)]
        rl = relation_lattice(curve_37a1, points)
        assert rl.rank == 2
        assert rl.basis == rl.basis_mod_torsion
        for row, tv in zip(rl.basis, rl.torsion):
            assert tv is None
            assert verify_relation_exact(curve_37a1, points, row)
        assert lattice_contains(rl.basis, [3, -1, 0])
        assert lattice_contains(rl.basis, [2, 0, 1])

    def test_cm_rho_relation(self, curve_32a):
        """[i](1, 0) = (-1, 0) が ||m|| = 1 の関係として見つかる。"""
        points = [Point(Fraction(1), Fraction(0)), Point(Fraction(-1), Fraction(0))]
        rl = relation_lattice(curve_32a, points, coeff_cap=20)
        assert rl.cm
        assert rl.rank == 2
        assert lattice_contains(rl.basis, [0, 1, -1, 0])

    @pytest.mark.slow
    def test_cm_rank_one(self):
        curve = CurveQ.parse("0,0,0,-2,0")
        points = [Point(Fraction(2), Fraction(2)), Point(Fraction(-1), Fraction(1))]
        rl = relation_lattice(curve, points)
        assert rl.basis_mod_torsion == [[1, 0, -1, 0], [0, 1, 0, -1]]
        assert rl.rank == 1
        assert all(tv is not None and tv.order == 2 for tv in rl.torsion)
        assert lattice_contains(rl.basis, [1, 1, -1, -1])
        assert not lattice_contains(rl.basis, [1, 0, -1, 0])

    @pytest.mark.slow
    def test_matches_exhaustive_search(self, curve_37a1):
        """x_i = k_i (0,0) の組 100 個で、関係格子を係数の箱の総当たりと比べる。

        37a1 はねじれを持たず (0,0) は位数無限なので、
        sum m_i x_i = O と sum m_i k_i = 0 は同値です。
        """
        rng = random.Random(37)
        eta = empirical_eta(curve_37a1)
        multiples = [k for k in range(-6, 7) if k]
        points = {k: point_mul(curve_37a1, k, P37) for k in multiples}
        box = range(-12, 13)
        for _ in range(100):
            ks = [rng.choice(multiples) for _ in range(rng.randint(1, 3))]
            rl = relation_lattice(curve_37a1, [points[k] for k in ks], eta=eta)
            exhaustive = [
                list(m)
                for m in itertools.product(box, repeat=len(ks))
                if any(m) and sum(c * k for c, k in zip(m, ks)) == 0
            ]
            expected = hnf_basis(exhaustive) if exhaustive else []
            actual = hnf_basis(rl.basis) if rl.basis else []
            assert actual == expected, ks
            assert rl.rank == len(expected)

    def test_no_points(self, curve_37a1):
        with pytest.raises(InvalidInputError):
            relation_lattice(curve_37a1, [])


def _empty_lattice(n: int) -> RelationLattice:
    return RelationLattice(
        n=n,
        cm=False,
        basis=[],
        basis_mod_torsion=[],
        torsion=(),
        coefficient_bound=1,
        completeness="masser",
        prec=256,
        q=mpmath.mpf(1),
        eta=EtaEstimate(None, None, 10),
    )


class TestSmallestTorsionCoset:
    def test_empty_lattice(self):
        points = [Point.infinity()] * 3
        coset = smallest_torsion_coset(_empty_lattice(3), points)
        assert coset.dim == 3
        assert coset.translate_order == 1
        assert not coset.proper

    def test_planted_double(self, curve_37a1):
        points = [P37, point_mul(curve_37a1, 2, P37)]
        coset = smallest_torsion_coset(relation_lattice(curve_37a1, points), points)
        assert coset.dim == 1
        assert coset.translate_order == 1
        assert coset.proper

    def test_torsion_point(self, curve_11a1):
        rl = relation_lattice(curve_11a1, [T11], coeff_cap=100)
        coset = smallest_torsion_coset(rl, [T11])
        assert coset.dim == 0
        assert coset.translate_order == 5

    def test_point_count_mismatch(self):
        with pytest.raises(InvalidInputError):
            smallest_torsion_coset(_empty_lattice(2), [Point.infinity()])
