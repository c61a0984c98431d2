"""q展開の係数と評価のテスト。"""

import mpmath
import pytest

from src.cmgraphs.core.errors import InvalidInputError
from src.cmgraphs.numerics.qseries import (
    E4_SERIES,
    J_SERIES,
    TailModel,
    eisenstein_coefficients,
    eval_qseries,
    j_coefficients,
    tail_bound,
)


class TestCoefficients:
    def test_j_coefficients(self):
        assert list(j_coefficients(4)) == [1, 744, 196884, 21493760]

    def test_eisenstein_coefficients(self):
        assert list(eisenstein_coefficients(4, 3)) == [1, 240, 2160]
        assert list(eisenstein_coefficients(6, 3)) == [1, -504, -16632]

    def test_unsupported_weight(self):
        with pytest.raises(InvalidInputError):
            eisenstein_coefficients(8, 3)


class TestEvaluation:
    """打ち切り誤差付き評価のテスト。"""

    def test_j_at_i(self):
        value = eval_qseries(J_SERIES, mpmath.mpc(0, 1), 256)
        assert abs(value.value - 1728) < mpmath.mpf(10) ** -60
        assert value.err < mpmath.ldexp(1, -200)

    def test_e4_at_rho_vanishes(self):
        with mpmath.workprec(300):
            rho = mpmath.mpc(-0.5, mpmath.sqrt(3) / 2)
        value = eval_qseries(E4_SERIES, rho, 256)
        assert abs(value.value) < mpmath.mpf(10) ** -60

    def test_lower_half_plane_rejected(self):
        with pytest.raises(InvalidInputError, match="not in upper half plane"):
            eval_qseries(J_SERIES, mpmath.mpc(0, -1), 128)

    def test_tail_bound_diverges_for_large_ratio(self):
        model = TailModel(1.0, 0.0, 0.0)
        assert tail_bound(model, 10, mpmath.mpf("1.5"), 0) == mpmath.inf
