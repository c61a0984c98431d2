"""二元二次形式とヒルベルト類多項式のテスト。"""

import mpmath
import pytest

from src.cmgraphs.arith.modular import j_invariant
from src.cmgraphs.arith.quadforms import (
    X,
    QuadForm,
    act_on_form,
    class_number,
    heegner_forms,
    hilbert_class_poly,
    reduce_form,
    reduced_forms,
    tau_of_form,
)
from src.cmgraphs.core.errors import InvalidInputError


class TestReducedForms:
    """簡約形式の列挙のテスト。"""

    def test_unique_form_for_minus_four(self):
        assert reduced_forms(-4) == [QuadForm(1, 0, 1)]

    def test_minus_23(self):
        assert set(reduced_forms(-23)) == {(1, 1, 6), (2, 1, 3), (2, -1, 3)}

    def test_invalid_discriminant(self):
        with pytest.raises(InvalidInputError, match="invalid discriminant"):
            reduced_forms(-5)
        with pytest.raises(InvalidInputError):
            reduced_forms(12)

    @pytest.mark.parametrize("d,h", [(-3, 1), (-23, 3), (-47, 5), (-163, 1), (-16, 1)])
    def test_class_numbers(self, d, h):
        assert class_number(d) == h

    def test_reduce_form(self):
        assert reduce_form((1, 5, 8)) == QuadForm(1, 1, 2)
        assert reduce_form((3, -3, 1)) == QuadForm(1, 1, 1)


class TestHeegnerForms:
    def test_level_37(self):
        forms = heegner_forms(-7, 37)
        assert len(forms) == 1
        a, b, c = forms[0]
        assert a % 37 == 0
        assert (b * b + 7) % (4 * 37) == 0
        assert b * b - 4 * a * c == -7

    def test_not_a_square(self):
        assert heegner_forms(-3, 11) == []

    def test_level_one(self):
        assert heegner_forms(-7, 1) == [QuadForm(1, 1, 2)]

    def test_one_form_per_class(self):
        forms = heegner_forms(-23, 3)
        assert len(forms) == 3
        assert {reduce_form(f) for f in forms} == set(reduced_forms(-23))
        residues = {f.b % 6 for f in forms}
        assert len(residues) == 1


class TestTauAndAction:
    def test_tau_of_form(self):
        assert abs(tau_of_form((1, 0, 1)).value.value - 1j) < 1e-70
        with mpmath.workprec(300):
            expected = mpmath.mpc(-1, mpmath.sqrt(23)) / 4
        assert abs(tau_of_form((2, 1, 3)).value.value - expected) < 1e-70

    def test_doubling_map(self):
        assert act_on_form([[2, 0], [0, 1]], (1, 1, 2)) == QuadForm(1, 2, 8)
        assert QuadForm(1, 2, 8).disc == -28


class TestHilbertClassPoly:
    def test_small_discriminants(self):
        assert hilbert_class_poly(-3).as_expr() == X
        assert hilbert_class_poly(-4).as_expr() == X - 1728
        assert hilbert_class_poly(-7).as_expr() == X + 3375

    def test_minus_23(self):
        poly = hilbert_class_poly(-23)
        assert poly.all_coeffs() == [1, 3491750, -5151296875, 12771880859375]

    @pytest.mark.parametrize("d", [-23, -71])
    def test_independent_of_precision(self, d):
        low = hilbert_class_poly(d, 256)
        high = hilbert_class_poly(d, 512)
        assert low.all_coeffs() == high.all_coeffs()
        assert low.degree() == class_number(d)

    def test_roots_are_singular_moduli(self):
        coeffs = [int(c) for c in hilbert_class_poly(-23, 512).all_coeffs()]
        with mpmath.workprec(512):
            roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=512)
            for f in reduced_forms(-23):
                j = j_invariant(tau_of_form(f, 512), 512).value
                assert min(abs(j - r) for r in roots) < mpmath.mpf(10) ** -50

    def test_low_precision_is_raised(self):
        assert hilbert_class_poly(-23, 16) == hilbert_class_poly(-23)

    def test_invalid_precision(self):
        with pytest.raises(InvalidInputError):
            hilbert_class_poly(-23, 0)

    def test_uses_cache(self):
        class Memory:
            def __init__(self):
                self.data = {}

            def get(self, kind, key):
                return self.data.get((kind, key))

            def put(self, kind, key, payload):
                self.data[(kind, key)] = payload

        store = Memory()
        hilbert_class_poly(-8, cache=store)
        assert store.data[("classpoly", "-8")]["coeffs"] == [1, -8000]
        assert hilbert_class_poly(-8, cache=store).as_expr() == X - 8000
