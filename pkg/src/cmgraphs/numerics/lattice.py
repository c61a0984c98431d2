"""整数格子の基本操作（LLL簡約、エルミート標準形、左核、格子の交わり）。

行列はすべて整数のリストのリストで、各行が格子の生成元です。
"""

from typing import List, Sequence, Tuple

from sympy import QQ, ZZ
from sympy.core.intfunc import igcdex
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMError

from ..core.errors import InvalidInputError

IntMatrix = List[List[int]]


def lll_reduce(
    basis: Sequence[Sequence[int]], delta: Tuple[int, int] = (3, 4)
) -> IntMatrix:
    """LLL簡約（delta = p/q、既定 3/4）。sympy の DomainMatrix.lll を使います。

    基底が一次従属なら ``InvalidInputError("degenerate basis")``。
    """
    n = len(basis)
    if n == 0:
        return []
    if hermite_normal_form(basis)[2] < n:
        raise InvalidInputError("degenerate basis")
    rows = [[ZZ(x) for x in row] for row in basis]
    matrix = DomainMatrix(rows, (n, len(basis[0])), ZZ)
    try:
        reduced = matrix.lll(delta=QQ(*delta))
    except DMError as exc:
        raise InvalidInputError(f"degenerate basis: {exc}") from exc
    return [[int(x) for x in row] for row in reduced.to_list()]


def hermite_normal_form(
    rows: Sequence[Sequence[int]],
) -> Tuple[IntMatrix, IntMatrix, int]:
    """行エルミート標準形 H = U A を返す。

    戻り値は (H, U, rank)。H の先頭 rank 行が非零で、残りは零行。
    U はユニモジュラで、U の rank 行目以降は A の左核の基底になる。
    """
    m = len(rows)
    if m == 0:
        return [], [], 0
    ncols = len(rows[0])
    a = [list(r) for r in rows]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    p = 0
    for col in range(ncols):
        if p == m:
            break
        for i in range(p + 1, m):
            y_val = a[i][col]
            if y_val == 0:
                continue
            x_val = a[p][col]
            s, t, g = igcdex(x_val, y_val)
            s, t, g = int(s), int(t), int(g)
            fx, fy = x_val // g, y_val // g
            for mat in (a, u):
                rp, ri = mat[p], mat[i]
                mat[p] = [s * v + t * w for v, w in zip(rp, ri)]
                mat[i] = [-fy * v + fx * w for v, w in zip(rp, ri)]
        if a[p][col] == 0:
            continue
        if a[p][col] < 0:
            a[p] = [-v for v in a[p]]
            u[p] = [-v for v in u[p]]
        pivot = a[p][col]
        for r in range(p):
            q = a[r][col] // pivot
            if q:
                a[r] = [v - q * w for v, w in zip(a[r], a[p])]
                u[r] = [v - q * w for v, w in zip(u[r], u[p])]
        p += 1
    return a, u, p


def hnf_basis(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """生成系から、HNFの非零行による標準基底を返す。"""
    h, _, rank = hermite_normal_form(rows)
    return h[:rank]


def left_kernel(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """sum v_i A_i = 0 となる整数ベクトル v の格子の基底（HNF）。"""
    if not rows:
        return []
    _, u, rank = hermite_normal_form(rows)
    kernel = u[rank:]
    return hnf_basis(kernel) if kernel else []


def lattice_intersection(
    first: Sequence[Sequence[int]], second: Sequence[Sequence[int]]
) -> IntMatrix:
    """二つの格子（同じ次元の空間内）の交わりの基底（HNF）。"""
    b1 = hnf_basis(first) if first else []
    b2 = hnf_basis(second) if second else []
    if not b1 or not b2:
        return []
    stacked = b1 + [[-x for x in row] for row in b2]
    result = []
    for vec in left_kernel(stacked):
        coeffs = vec[: len(b1)]
        width = len(b1[0])
        result.append(
            [sum(c * row[j] for c, row in zip(coeffs, b1)) for j in range(width)]
        )
    return hnf_basis(result) if result else []


def lattice_contains(basis: Sequence[Sequence[int]], vector: Sequence[int]) -> bool:
    """``vector`` が ``basis`` の張る格子に属するか。"""
    base = hnf_basis(basis) if basis else []
    if not any(vector):
        return True
    if not base:
        return False
    return hnf_basis(base + [list(vector)]) == base


def rank(rows: Sequence[Sequence[int]]) -> int:
    return hermite_normal_form(rows)[2] if rows else 0


def transpose(rows: Sequence[Sequence[int]]) -> IntMatrix:
    return [list(col) for col in zip(*rows)]


def saturate(rows: Sequence[Sequence[int]], dim: int) -> IntMatrix:
    """(L tensor Q) と Z^dim の交わり（HNF）。"""
    base = hnf_basis(rows) if rows else []
    if not base:
        return []
    orthogonal = left_kernel(transpose(base))
    if not orthogonal:
        return [[int(i == j) for j in range(dim)] for i in range(dim)]
    return left_kernel(transpose(orthogonal))
