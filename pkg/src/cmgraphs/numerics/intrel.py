"""LLLによる整数関係の探索と代数的数の認識。"""

from typing import List, Optional, Sequence

import mpmath
from sympy import Poly, Symbol

from .lattice import lll_reduce, saturate
from .precision import as_mpc
from ..core.errors import IndeterminateError, InvalidInputError
from ..utils.logger import get_logger

logger = get_logger(__name__)

X = Symbol("X")


def _check_budget(count: int, bound: int, prec: int) -> None:
    if bound < 1:
        raise InvalidInputError("coefficient bound must be positive")
    needed = count * mpmath.log(2 * bound + 1, 2)
    if needed > prec / 4:
        raise IndeterminateError(
            f"insufficient precision: {count} values with bound {bound} "
            f"need about {int(mpmath.ceil(4 * needed))} bits"
        )


def _normalize_sign(vec: List[int]) -> List[int]:
    for v in vec:
        if v != 0:
            return vec if v > 0 else [-x for x in vec]
    return vec


def _candidate_relations(values: Sequence, prec: int, bound: int) -> List[List[int]]:
    k = len(values)
    _check_budget(k, bound, prec)
    with mpmath.workprec(prec + 32):
        zs = [as_mpc(v) for v in values]
        scale = mpmath.ldexp(1, prec // 2)
        threshold = mpmath.ldexp(1, -(prec // 4))
        rows = []
        for i, z in enumerate(zs):
            row = [int(i == j) for j in range(k)]
            row.append(int(mpmath.nint(scale * z.real)))
            row.append(int(mpmath.nint(scale * z.imag)))
            rows.append(row)
        reduced = lll_reduce(rows)
        accepted = []
        for row in reduced:
            m = row[:k]
            if not any(m) or max(abs(x) for x in m) > bound:
                continue
            residual = abs(mpmath.fsum(c * z for c, z in zip(m, zs)))
            if residual < threshold:
                accepted.append(_normalize_sign(m))
    return accepted


def find_integer_relation(
    values: Sequence, prec: int, bound: int
) -> Optional[List[int]]:
    """sum m_i v_i ~ 0 となる最短の非零整数ベクトル（|m_i| <= bound）。

    最初の非零成分が正になるよう符号を揃えます。見つからなければ None。
    """
    accepted = _candidate_relations(values, prec, bound)
    if not accepted:
        return None
    return min(accepted, key=lambda m: (sum(x * x for x in m), m))


def integer_relation_basis(values: Sequence, prec: int, bound: int) -> List[List[int]]:
    """検出されたすべての関係が張る格子の飽和（HNF）。"""
    accepted = _candidate_relations(values, prec, bound)
    if not accepted:
        return []
    return saturate(accepted, len(values))


def default_height_bound(degree: int, prec: int) -> int:
    k = degree + 1
    return max(1, int(mpmath.floor(mpmath.ldexp(1, prec // (4 * k)) / 2)) - 1)


def recognize_algebraic(
    value, prec: int, degree: int, height_bound: Optional[int] = None
) -> Optional[Poly]:
    """``value`` の最小多項式（次数 <= degree、原始的、主係数正）を探す。

    見つかった多項式は既約性と、根が ``value`` に近いことを確認してから返します。
    """
    z = as_mpc(value)
    for d in range(1, degree + 1):
        bound = height_bound
        if bound is None:
            bound = default_height_bound(d, prec)
        with mpmath.workprec(prec + 32):
            powers = [z**i for i in range(d + 1)]
        try:
            rel = find_integer_relation(powers, prec, bound)
        except IndeterminateError:
            logger.debug(
                "degree %d: coefficient bound %d exceeds precision budget", d, bound
            )
            break
        if rel is None or rel[-1] == 0:
            continue
        poly = Poly(list(reversed(rel)), X).primitive()[1]
        if poly.LC() < 0:
            poly = -poly
        if not poly.is_irreducible:
            continue
        if _root_near(poly, z, prec):
            return poly
    return None


def _root_near(poly: Poly, z, prec: int) -> bool:
    root = refine_root(poly, z, prec)
    with mpmath.workprec(prec):
        return abs(root - z) < mpmath.ldexp(1, -(prec // 4))


def refine_root(poly: Poly, value, prec: int):
    """``poly`` の根のうち ``value`` に最も近いものを 2*prec で返す。"""
    coeffs = [int(c) for c in poly.all_coeffs()]
    z = as_mpc(value)
    with mpmath.workprec(2 * prec):
        if len(coeffs) == 2:
            return mpmath.mpf(-coeffs[1]) / coeffs[0]
        try:
            roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=2 * prec)
        except mpmath.libmp.NoConvergence as exc:
            raise IndeterminateError("root refinement did not converge") from exc
        return min(roots, key=lambda r: abs(r - z))
