"""モジュラー・パラメータ付けと Heegner 点のテスト。"""

import math
from fractions import Fraction

import mpmath
import pytest

from src.cmgraphs.arith.modular import hecke_neighbors, j_invariant
from src.cmgraphs.arith.quadforms import tau_of_form
from src.cmgraphs.core.errors import InvalidInputError
from src.cmgraphs.curves.elliptic import Point
from src.cmgraphs.curves.heights import canonical_height
from src.cmgraphs.curves.modparam import (
    CorrespondenceSpec,
    an_coefficients,
    build_param_map,
    fricke_involution,
    fricke_matrix,
    heegner_point,
    phi_eval,
    torsion_order_of,
    v_images,
)


@pytest.fixture(scope="module")
def pm_11a1():
    from src.cmgraphs.curves.elliptic import CurveQ

    return build_param_map(CurveQ.parse("0,-1,1,-10,-20"), prec=128)


@pytest.fixture(scope="module")
def pm_37a1():
    from src.cmgraphs.curves.elliptic import CurveQ

    return build_param_map(CurveQ.parse("0,0,1,-1,0"), prec=128)


class TestCoefficients:
    def test_11a1(self, curve_11a1):
        form = an_coefficients(curve_11a1, 12)
        assert form.coefficients(12) == [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2]

    def test_37a1_prime_power(self, curve_37a1):
        form = an_coefficients(curve_37a1, 10)
        assert form.a(1) == 1
        assert form.a(4) == 2
        assert form.a(6) == form.a(2) * form.a(3)

    def test_multiplicativity(self, curve_37a1):
        form = an_coefficients(curve_37a1, 100)
        for m in range(2, 11):
            for n in range(2, 100 // m + 1):
                if math.gcd(m, n) == 1:
                    assert form.a(m * n) == form.a(m) * form.a(n)

    def test_extension_is_consistent(self, curve_11a1):
        small = an_coefficients(curve_11a1, 30)
        small.extend(60)
        expected = an_coefficients(curve_11a1, 60).coefficients(60)
        assert small.coefficients(60) == expected

    def test_invalid_count(self, curve_11a1):
        with pytest.raises(InvalidInputError):
            an_coefficients(curve_11a1, 0)


class TestFricke:
    def test_matrix(self):
        assert fricke_matrix(11) == (0, -1, 11, 0)

    def test_involution(self):
        tau = mpmath.mpc("0.2", "0.7")
        back = fricke_involution(fricke_involution(tau, 37), 37)
        assert abs(back - tau) < 1e-12

    def test_fixed_point(self):
        fixed = mpmath.mpc(0, 1) / mpmath.sqrt(11)
        assert abs(fricke_involution(fixed, 11) - fixed) < 1e-12

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            fricke_involution(mpmath.mpc(0, 1), 0)
        with pytest.raises(InvalidInputError, match="upper half plane"):
            fricke_involution(mpmath.mpc(0, -1), 11)


@pytest.mark.slow
class TestParamMap:
    def test_fricke_sign(self, pm_11a1, pm_37a1):
        # 解析的階数 0 なら -1、1 なら +1
        assert pm_11a1.fricke_sign == -1
        assert pm_37a1.fricke_sign == 1

    def test_optimal_curve_scalar(self, pm_11a1):
        assert pm_11a1.lam == 1

    def test_cusp_at_infinity(self, pm_11a1):
        value = phi_eval(pm_11a1, "oo")
        assert value.point.infinity

    def test_cusp_zero_is_five_torsion(self, pm_11a1):
        value = phi_eval(pm_11a1, 0)
        assert torsion_order_of(pm_11a1, value.z) == 5

    def test_unsupported_cusp(self, pm_11a1):
        with pytest.raises(InvalidInputError, match="unsupported cusp"):
            phi_eval(pm_11a1, "1/0")

    @pytest.mark.parametrize("cusp", [Fraction(1, 2), Fraction(3, 5), 7])
    def test_cusps_equivalent_to_zero(self, pm_11a1, cusp):
        z0 = phi_eval(pm_11a1, 0).z.value
        z = phi_eval(pm_11a1, cusp).z.value
        assert pm_11a1.lattice.contains(z - z0)
        assert torsion_order_of(pm_11a1, phi_eval(pm_11a1, cusp).z) == 5

    def test_cusp_equivalent_to_infinity(self, pm_11a1):
        assert phi_eval(pm_11a1, Fraction(1, 22)).point.infinity

    def test_gamma0_invariance(self, pm_11a1):
        tau = mpmath.mpc("0.1", "0.3")
        moved = tau / (11 * tau + 1)
        z1 = phi_eval(pm_11a1, tau).z.value
        z2 = phi_eval(pm_11a1, moved).z.value
        assert pm_11a1.lattice.contains(z1 - z2, 1e-20)


@pytest.mark.slow
class TestHeegnerPoints:
    def test_hypothesis_fails(self, pm_11a1):
        with pytest.raises(InvalidInputError, match="Heegner hypothesis fails"):
            heegner_point(pm_11a1, -3)

    def test_37a1_minus_7(self, pm_37a1):
        result = heegner_point(pm_37a1, -7)
        assert len(result.conjugates) == 1
        rational = result.conjugates[0].rational
        assert rational is not None
        curve = pm_37a1.curve
        assert curve.contains(rational)
        ratio = canonical_height(curve, rational).value / canonical_height(
            curve, Point(Fraction(0), Fraction(0))
        ).value
        n = round(math.sqrt(ratio))
        assert n >= 1
        assert abs(ratio - n * n) < 1e-6

    def test_points_lie_on_curve(self, pm_37a1):
        result = heegner_point(pm_37a1, -11)
        curve = pm_37a1.curve
        for conj in result.conjugates:
            x, y = conj.point.x, conj.point.y
            residual = y * y + y - x**3 + x
            assert abs(residual) < 1e-20


@pytest.mark.slow
class TestVImages:
    def test_degree_one_is_phi(self, pm_11a1):
        s = tau_of_form((11, 9, 2))
        images = v_images(CorrespondenceSpec(pm_11a1, 1), s)
        assert len(images) == 1

    def test_degree_two_matches_hecke_neighbors(self, pm_11a1):
        s = tau_of_form((1, 1, 6))
        images = v_images(CorrespondenceSpec(pm_11a1, 2), s)
        assert len(images) == 3
        neighbors = hecke_neighbors(j_invariant(s), 2)
        for image in images:
            j = j_invariant(image.tau).value
            assert min(abs(j - n.value) for n in neighbors) < 1e-20
