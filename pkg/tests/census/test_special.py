"""特殊部分多様体の記述と特殊グラフの記録のテスト。"""

import mpmath
import pytest

from src.cmgraphs.census.special import (
    FixedCoordinate,
    GraphRecord,
    Link,
    OrbitPoint,
    SpecialDesc,
    defect,
    exemplary_filter,
    hecke_orbit,
    hecke_special,
    heegner_points,
    link_matrix,
    relation_support,
    special_closure_Y,
    structural_witnesses,
)
from src.cmgraphs.arith.quadforms import tau_of_form
from src.cmgraphs.core.errors import InvalidInputError
from src.cmgraphs.relations.lattice import CosetDesc

DOUBLING = Link(0, 1, 2, (2, 0, 0, 1))
FIXED = (FixedCoordinate(0, -7, "x"), FixedCoordinate(1, -28, "y"))


def tuple_record(translate: int = 1) -> GraphRecord:
    special = SpecialDesc(2, FIXED, (DOUBLING,))
    coset = CosetDesc([[1, -1]], translate, 1, 2)
    return GraphRecord(special, 1, "pair", 28, coset, 0)


def family_record(translate: int = 1) -> GraphRecord:
    special = SpecialDesc(2, (), (DOUBLING,))
    coset = CosetDesc([[1, -1]], translate, 1, 2)
    return GraphRecord(special, 1, special.key(), 28, coset, 1, "family")


class TestSpecialDesc:
    def test_components_and_dim(self):
        special = SpecialDesc(3, (FixedCoordinate(1, -3, "a"),), (Link(0, 2, 1),))
        assert special.components() == [[0, 2], [1]]
        assert special.dim == 1
        assert special.fixed_indices == (1,)

    def test_point_is_zero_dimensional(self):
        assert SpecialDesc(2, FIXED, (DOUBLING,)).dim == 0

    def test_with_free(self):
        special = SpecialDesc(2, FIXED, (DOUBLING,)).with_free([0, 1])
        assert special.fixed == ()
        assert special.dim == 1

    def test_contains(self):
        small = SpecialDesc(2, FIXED, (DOUBLING,))
        big = SpecialDesc(2, (), (DOUBLING,))
        assert big.contains(small)
        assert not small.contains(big)
        assert not big.contains(SpecialDesc(3))

    def test_key_is_deterministic(self):
        special = SpecialDesc(2, tuple(reversed(FIXED)), (DOUBLING,))
        assert special.key() == (
            "n=2;fixed=[0:x,1:y];links=[s1=(2, 0, 0, 1).s0 (N=2)]"
        )

    def test_link_outside_range(self):
        with pytest.raises(InvalidInputError):
            SpecialDesc(1, (), (DOUBLING,))

    def test_link_determinant(self):
        with pytest.raises(InvalidInputError, match="det"):
            Link(0, 1, 3, (2, 0, 0, 1))

    def test_invalid_fixed_discriminant(self):
        with pytest.raises(InvalidInputError):
            FixedCoordinate(0, -5, "bad")


class TestDefect:
    def test_tuple(self):
        assert defect(tuple_record()) == 1

    def test_family(self):
        assert defect(family_record()) == 1

    def test_independent(self):
        record = GraphRecord(SpecialDesc(2, FIXED), 1, "k", 28, None, 0)
        assert record.dim_b == 2
        assert not record.dependent
        assert defect(record) == 2

    def test_inconsistent(self):
        record = GraphRecord(SpecialDesc(2, FIXED), 1, "k", 28, None, 2)
        with pytest.raises(InvalidInputError, match="inconsistent"):
            defect(record)

    def test_to_dict(self):
        entry = tuple_record().to_dict()
        assert entry["defect"] == 1
        assert entry["relations"] == [[1, -1]]
        assert entry["component"] == "branch0"


class TestExemplaryFilter:
    def test_family_dominates_point(self):
        family = family_record()
        assert exemplary_filter([tuple_record(), family]) == [family]

    def test_different_translate_is_kept(self):
        records = [tuple_record(1), family_record(2)]
        assert exemplary_filter(records) == records

    def test_empty(self):
        assert exemplary_filter([]) == []

    def test_mixed_sizes(self):
        other = GraphRecord(SpecialDesc(1), 1, "k", 3, None, 0)
        with pytest.raises(InvalidInputError):
            exemplary_filter([tuple_record(), other])


class TestWitnesses:
    def test_relation_support(self):
        assert relation_support([1, 0, 0, 0, 2, 1], 3, cm=True) == (0, 2)
        assert relation_support([0, 3, -1], 3, cm=False) == (1, 2)

    def test_torsion(self):
        special = SpecialDesc(2, FIXED)
        coset = CosetDesc([[3, 0]], 1, 1, 2)
        assert structural_witnesses(special, coset, False) == ("torsion:s0",)

    def test_link(self):
        special = SpecialDesc(2, FIXED, (DOUBLING,))
        coset = CosetDesc([[1, -1]], 1, 1, 2)
        assert structural_witnesses(special, coset, False) == (
            "link:s1=(2, 0, 0, 1).s0 (N=2)",
        )

    def test_small_discriminant(self):
        special = SpecialDesc(2, FIXED)
        coset = CosetDesc([[2, -1]], 1, 1, 2)
        assert structural_witnesses(special, coset, False, 7) == ("disc:s0",)
        assert structural_witnesses(special, coset, False, 28) == (
            "disc:s0",
            "disc:s1",
        )

    def test_large_discriminants_are_anomalous(self):
        special = SpecialDesc(2, FIXED)
        coset = CosetDesc([[2, -1]], 1, 1, 2)
        assert structural_witnesses(special, coset, False, 6) == ()

    def test_discriminant_outside_support(self):
        special = SpecialDesc(2, FIXED)
        coset = CosetDesc([[0, 3]], 1, 1, 2)
        assert structural_witnesses(special, coset, False, 163) == ("torsion:s1",)

    def test_hecke_base_has_no_discriminant(self):
        special = SpecialDesc(2, (FixedCoordinate(0, 0, "u"),))
        coset = CosetDesc([[2, -1]], 1, 1, 2)
        assert structural_witnesses(special, coset, False, 163) == ()


class TestHeckeOrbit:
    def test_depth_zero(self):
        orbit = hecke_orbit([mpmath.mpc("0.1", "1.3")], 0)
        assert len(orbit) == 1
        assert orbit[0].matrix == (1, 0, 0, 1)

    def test_orbit_sizes(self):
        # psi(1) + psi(2) + psi(3) = 1 + 3 + 4
        orbit = hecke_orbit([mpmath.mpc("0.1", "1.3")], 3)
        assert len(orbit) == 8
        assert sorted({p.level for p in orbit}) == [1, 2, 3]

    def test_two_bases(self):
        orbit = hecke_orbit([mpmath.mpc(0, 1), mpmath.mpc("0.2", 2)], 2)
        assert [p.base for p in orbit].count(1) == 4

    def test_lower_half_plane(self):
        with pytest.raises(InvalidInputError, match="upper half plane"):
            hecke_orbit([mpmath.mpc(0, -1)], 1)

    def test_depth_range(self):
        with pytest.raises(InvalidInputError):
            hecke_orbit([mpmath.mpc(0, 1)], -1)

    def test_label(self):
        point = OrbitPoint(0, (2, 0, 0, 1), 2, mpmath.mpc(0, 2))
        assert point.label == "u0:(2, 0, 0, 1)"


class TestHeckeSpecial:
    def test_link_between_orbit_points(self):
        tau = mpmath.mpc(0, 1)
        points = [
            OrbitPoint(0, (1, 0, 0, 1), 1, tau),
            OrbitPoint(0, (2, 0, 0, 1), 2, 2 * tau),
        ]
        special = hecke_special(points)
        assert special.links == (Link(0, 1, 2, (2, 0, 0, 1)),)
        assert special.dim == 0
        assert special.with_free([0, 1]).dim == 1

    def test_different_bases_are_not_linked(self):
        points = [
            OrbitPoint(0, (1, 0, 0, 1), 1, mpmath.mpc(0, 1)),
            OrbitPoint(1, (1, 0, 0, 1), 1, mpmath.mpc(0, 2)),
        ]
        assert hecke_special(points).links == ()


class TestHeegnerPoints:
    def test_too_small(self):
        assert heegner_points(11, 2) == []

    def test_invalid_bound(self):
        with pytest.raises(InvalidInputError):
            heegner_points(11, 0)

    def test_level_11(self):
        points = heegner_points(11, 7, prec=64)
        assert points
        assert {p.disc for p in points} == {-7}


class TestSpecialClosure:
    def test_diagonal(self):
        s = tau_of_form((1, 1, 2))
        special = special_closure_Y([s, s], 1)
        assert special.links == (Link(0, 1, 1, (1, 0, 0, 1)),)
        assert special.dim == 0
        assert special.fixed_indices == (0, 1)

    def test_doubling(self):
        s = tau_of_form((1, 1, 2))
        doubled = tau_of_form((1, 2, 8))
        special = special_closure_Y([s, doubled], 5)
        assert special.links == (DOUBLING,)
        assert special.dim == 0

    def test_smallest_level_only(self):
        s = tau_of_form((1, 1, 2))
        special = special_closure_Y([s, s], 4)
        assert [link.degree for link in special.links] == [1]

    @pytest.mark.slow
    def test_no_links(self):
        points = [tau_of_form((1, 1, 1)), tau_of_form((1, 0, 1))]
        special = special_closure_Y(points, 10)
        assert special.links == ()
        assert special.dim == 0

    def test_invalid_bound(self):
        with pytest.raises(InvalidInputError):
            special_closure_Y([tau_of_form((1, 1, 2))], 0)


class TestLinkMatrix:
    def test_doubling(self):
        tau = tau_of_form((1, 1, 2)).value.value
        assert link_matrix(tau, 2 * tau, 2, 128) == (2, 0, 0, 1)

    def test_unrelated(self):
        rho = tau_of_form((1, 1, 1)).value.value
        i = tau_of_form((1, 0, 1)).value.value
        assert link_matrix(rho, i, 2, 128) is None
