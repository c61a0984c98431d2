"""j関数、基本領域への簡約、古典的モジュラー多項式とX_N上の判定。"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple, Union

import mpmath
from sympy import CRootOf, Integer, Poly, Rational, Symbol, factor_list, primefactors

from ..core.errors import IndeterminateError, InternalError, InvalidInputError
from ..numerics import DEFAULT_PREC
from ..numerics.precision import PrecComplex, as_mpc
from ..numerics.qseries import J_SERIES, eval_qseries, nome
from ..utils.logger import get_logger

if TYPE_CHECKING:
    from .quadforms import TauPoint

logger = get_logger(__name__)

X, Y = Symbol("X"), Symbol("Y")
MAX_MODPOLY_LEVEL = 20


@dataclass(frozen=True)
class MobiusMap:
    """SL2(Z) の元 [[a, b], [c, d]]。"""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        if self.a * self.d - self.b * self.c != 1:
            raise InvalidInputError("MobiusMap must have determinant 1")

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self ∘ other。"""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, tau):
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def as_matrix(self) -> List[List[int]]:
        return [[self.a, self.b], [self.c, self.d]]


TRANSLATE = MobiusMap(1, 1, 0, 1)
INVERT = MobiusMap(0, -1, 1, 0)


def reduce_to_fundamental_domain(
    tau, prec: int = DEFAULT_PREC
) -> Tuple[PrecComplex, MobiusMap]:
    """tau を標準基本領域に移し、(tau', gamma) を返す（tau' = gamma tau）。

    境界では Re = +1/2 と、|tau| = 1 上の Re >= 0 側を選びます。
    """
    guard = prec + 32
    if hasattr(tau, "form"):
        # TauPoint は形式から必要な精度で作り直す
        fa, fb, fc = tau.form
        with mpmath.workprec(guard):
            src = mpmath.mpc(-fb, mpmath.sqrt(4 * fa * fc - fb * fb)) / (2 * fa)
    else:
        src = tau
    err = src.err if isinstance(src, PrecComplex) else mpmath.mpf(0)
    with mpmath.workprec(guard):
        z = as_mpc(src)
        if z.imag <= 0:
            raise InvalidInputError("not in upper half plane")
        tol = mpmath.ldexp(1, -(prec - 8))
        gamma = MobiusMap.identity()
        for _ in range(10000):
            n = int(mpmath.nint(z.real))
            if n:
                z -= n
                gamma = MobiusMap(1, -n, 0, 1).compose(gamma)
            if abs(z) < 1 - tol:
                z = -1 / z
                gamma = INVERT.compose(gamma)
                continue
            break
        else:
            raise InternalError("fundamental domain reduction did not terminate")
        if abs(z.real + mpmath.mpf(1) / 2) < tol:
            z += 1
            gamma = TRANSLATE.compose(gamma)
        if abs(abs(z) - 1) < tol and z.real < -tol:
            z = -1 / z
            gamma = INVERT.compose(gamma)
        # |d(gamma tau)/d tau| = 1 / |c tau + d|^2
        scale = 1 / abs(gamma.c * as_mpc(src) + gamma.d) ** 2
    return PrecComplex.rounded(z, prec, err * scale * 2), gamma


def _j_derivative_scale(tau, prec: int) -> mpmath.mpf:
    """|j'(tau)| の粗い上界（先頭64項の和の2倍）。"""
    q = nome(tau, prec)
    with mpmath.workprec(prec):
        r = abs(q)
        total = mpmath.mpf(0)
        power = 1 / r
        for n, c in enumerate(J_SERIES.coefficients(64)):
            total += abs((n - 1) * c) * power
            power *= r
        return 4 * mpmath.pi * total


def j_invariant(
    tau: Union["TauPoint", PrecComplex, Any], prec: int = DEFAULT_PREC
) -> PrecComplex:
    """j(tau) を誤差半径付きで評価する。"""
    reduced, _ = reduce_to_fundamental_domain(tau, prec + 16)
    value = eval_qseries(J_SERIES, reduced.value, prec + 16)
    err = value.err
    if reduced.err > 0:
        err += _j_derivative_scale(reduced.value, 64) * reduced.err
    with mpmath.workprec(prec):
        return PrecComplex.rounded(value.value, prec, err)


def psi(level: int) -> int:
    """指数 [SL2(Z) : Gamma0(N)] = N prod_{p|N} (1 + 1/p)。"""
    value = level
    for p in primefactors(level):
        value = value // p * (p + 1)
    return value


def isogeny_matrices(level: int) -> List[Tuple[int, int, int]]:
    """行列式 N の原始上三角行列 [[a, b], [0, d]]（0 <= b < d）を (a, b, d) で列挙。"""
    out = []
    for a in range(1, level + 1):
        if level % a:
            continue
        d = level // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                out.append((a, b, d))
    return out


@dataclass(frozen=True)
class ModPoly:
    """古典的モジュラー多項式 Phi_N(X, Y)。"""

    level: int
    poly: Poly

    def terms(self) -> List[Tuple[int, int, int]]:
        return [(int(i), int(k), int(c)) for (i, k), c in self.poly.terms()]

    def to_payload(self) -> Dict[str, Any]:
        return {"level": self.level, "terms": [list(t) for t in self.terms()]}

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "ModPoly":
        data = {(i, k): c for i, k, c in payload["terms"]}
        return cls(int(payload["level"]), Poly.from_dict(data, X, Y))

    def evaluate_exact(self, x, y):
        return self.poly.eval({X: x, Y: y})


def _modpoly_bits(level: int) -> int:
    p = psi(level)
    return int(6 * p * (math.log(level) + 4.2) / math.log(2)) + 12 * p + 128


def _poly_from_roots(roots: Sequence) -> List:
    """prod (X - r) の係数（低次から）。"""
    coeffs = [mpmath.mpc(1)]
    for r in roots:
        nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= r * c
        coeffs = nxt
    return coeffs


def _round_integer(value, tolerance) -> int:
    n = mpmath.nint(value.real)
    if abs(value.real - n) > tolerance or abs(value.imag) > tolerance:
        raise IndeterminateError("coefficient not close to an integer")
    return int(n)


def _modpoly_attempt(level: int, bits: int) -> ModPoly:
    deg = psi(level)
    mats = isogeny_matrices(level)
    count = deg + 1
    with mpmath.workprec(bits):
        samples = []
        rows = []
        for m in range(count):
            re = mpmath.mpf(m) / count - mpmath.mpf(1) / 2
            tau = mpmath.mpc(re, mpmath.mpf(11) / 10)
            y_val = j_invariant(tau, bits).value
            images = [j_invariant((a * tau + b) / d, bits).value for a, b, d in mats]
            samples.append(y_val)
            rows.append(_poly_from_roots(images))
        vander = mpmath.matrix([[y**k for k in range(count)] for y in samples])
        tolerance = mpmath.mpf(1) / 4
        data: Dict[Tuple[int, int], int] = {}
        for i in range(count):
            rhs = mpmath.matrix([rows[m][i] for m in range(count)])
            sol = mpmath.lu_solve(vander, rhs)
            for k in range(count):
                c = _round_integer(sol[k], tolerance)
                if c:
                    data[(i, k)] = c
    for (i, k), c in data.items():
        if data.get((k, i)) != c:
            raise IndeterminateError("modular polynomial failed the symmetry check")
    return ModPoly(level, Poly.from_dict(data, X, Y))


def _compute_modpoly(level: int) -> ModPoly:
    if level == 1:
        return ModPoly(1, Poly(X - Y, X, Y))
    bits = _modpoly_bits(level)
    for _ in range(4):
        try:
            result = _modpoly_attempt(level, bits)
            logger.debug("Phi_%d computed at %d bits", level, bits)
            return result
        except IndeterminateError:
            logger.info("Phi_%d: retrying at %d bits", level, 2 * bits)
            bits *= 2
    raise IndeterminateError(f"could not compute Phi_{level}")


_LOADED_MODPOLYS: Dict[int, ModPoly] = {}


def modular_polynomial(level: int, cache: Optional[Any] = None) -> ModPoly:
    """Phi_N (1 <= N <= 20)。``cache`` は get/put を持つディスクキャッシュ。

    一度得た Phi_N はプロセス内で保持し、ディスクにないものは書き込みます。
    """
    if not 1 <= level <= MAX_MODPOLY_LEVEL:
        raise InvalidInputError(
            f"modular polynomial level {level} out of supported range"
        )
    result = _LOADED_MODPOLYS.get(level)
    stored = cache.get("modpoly", str(level)) if cache is not None else None
    if result is None and stored is not None:
        result = ModPoly.from_payload(stored)
    if result is None:
        result = _compute_modpoly(level)
    if cache is not None and stored is None:
        cache.put("modpoly", str(level), result.to_payload())
    _LOADED_MODPOLYS[level] = result
    return result


def preload_modular_polynomials(top: int, cache: Optional[Any] = None) -> int:
    """Phi_1..Phi_top を読み込む（top は対応範囲に切り詰め）。読み込んだ個数を返す。"""
    top = min(top, MAX_MODPOLY_LEVEL)
    for level in range(1, top + 1):
        modular_polynomial(level, cache)
    return max(top, 0)


def _exact_j(disc: int) -> Optional[int]:
    """類数1なら j 値（整数）を、そうでなければ None。"""
    from .quadforms import class_number, hilbert_class_poly

    if class_number(disc) != 1:
        return None
    return -int(hilbert_class_poly(disc).all_coeffs()[-1])


def _modpoly_ratio(phi: ModPoly, j1, j2, prec: int) -> mpmath.mpf:
    """|Phi(j1, j2)| / sum |c j1^i j2^k|。"""
    with mpmath.workprec(prec + 64):
        a, b = as_mpc(j1), as_mpc(j2)
        total = mpmath.mpc(0)
        scale = mpmath.mpf(0)
        for i, k, c in phi.terms():
            term = c * a**i * b**k
            total += term
            scale += abs(term)
        if scale == 0:
            return mpmath.mpf(0)
        return abs(total) / scale


def in_XN(
    s1: "TauPoint",
    s2: "TauPoint",
    level: int,
    prec: int = DEFAULT_PREC,
    cache: Optional[Any] = None,
) -> bool:
    """(j(s1), j(s2)) が X_N 上にあるか。

    両方の j 値が整数なら厳密に、そうでなければ正規化した値を
    2^(-prec/2)（零）と 2^(-prec/4)（非零）で判定します。
    中間帯では終結式で排除を試み、できなければ ``IndeterminateError``。
    """
    phi = modular_polynomial(level, cache)
    e1, e2 = _exact_j(s1.disc), _exact_j(s2.disc)
    if e1 is not None and e2 is not None:
        return phi.evaluate_exact(e1, e2) == 0
    j1 = j_invariant(s1, prec + 32)
    j2 = j_invariant(s2, prec + 32)
    ratio = _modpoly_ratio(phi, j1, j2, prec)
    if ratio < mpmath.ldexp(1, -(prec // 2)):
        return True
    if ratio > mpmath.ldexp(1, -(prec // 4)):
        return False
    if not _conjugates_related(phi, s1.disc, s2.disc):
        return False
    raise IndeterminateError("indeterminate at current precision")


def _conjugates_related(phi: ModPoly, d1: int, d2: int) -> bool:
    """H_d1 と H_d2 の根の組で Phi_N を零にするものがあるか（終結式で判定）。"""
    from .quadforms import hilbert_class_poly

    h1 = hilbert_class_poly(d1).as_expr()
    h2 = Poly(hilbert_class_poly(d2).as_expr().subs(X, Y), Y)
    res = Poly(phi.poly.as_expr(), X, Y).resultant(Poly(h1, X, Y))
    res_y = Poly(res.as_expr(), Y)
    return res_y.gcd(h2).degree() > 0


def hecke_neighbors(j0, level: int, prec: int = DEFAULT_PREC) -> List:
    """Phi_N(j0, Y) の根を重複込みで返す。

    j0 が整数または有理数なら sympy の代数的数（Integer/Rational/CRootOf）、
    数値なら PrecComplex のリスト。
    """
    phi = modular_polynomial(level)
    if isinstance(j0, (int, Integer, Rational)) or hasattr(j0, "denominator"):
        specialized = Poly(phi.poly.as_expr().subs(X, Rational(j0)), Y)
        roots: List = []
        for factor, mult in factor_list(specialized)[1]:
            if factor.degree() == 1:
                c1, c0 = factor.all_coeffs()
                found = [Rational(-c0, c1)]
            else:
                found = [CRootOf(factor, i) for i in range(factor.degree())]
            roots.extend(found * mult)
        return roots
    base = as_mpc(j0)
    deg = psi(level)
    with mpmath.workprec(prec + 64):
        coeffs = [mpmath.mpc(0)] * (deg + 1)
        for i, k, c in phi.terms():
            coeffs[k] += c * base**i
        try:
            found, err = mpmath.polyroots(
                list(reversed(coeffs)), maxsteps=400, extraprec=2 * prec, error=True
            )
        except mpmath.libmp.NoConvergence as exc:
            raise IndeterminateError(
                "indeterminate: Hecke neighbor root finding failed"
            ) from exc
        radius = err * (1 + max(abs(r) for r in found))
    return [PrecComplex.rounded(r, prec, radius) for r in found]


def height_of_quadratic_point(point: "TauPoint", prec: int = 64) -> mpmath.mpf:
    """tau の乗法的Weil高さ sqrt(max(a, c))（最小多項式 a X^2 + b X + c から）。"""
    form = point.form
    with mpmath.workprec(prec):
        return mpmath.sqrt(max(form.a, form.c))


@dataclass(frozen=True)
class IndependenceWitness:
    """D-独立性が破れる理由。kind は "discriminant" か "isogeny"。"""

    kind: str
    indices: Tuple[int, ...]
    level: Optional[int] = None

    def describe(self) -> str:
        if self.kind == "discriminant":
            return f"|disc(s_{self.indices[0]})| <= D"
        return f"(s_{self.indices[0]}, s_{self.indices[1]}) in X_{self.level}"


def is_D_independent(
    points: Sequence["TauPoint"],
    bound: int,
    prec: int = DEFAULT_PREC,
    cache: Optional[Any] = None,
) -> Tuple[bool, Optional[IndependenceWitness]]:
    """全ての |disc| > D で、N <= D の X_N 関係を持つ組がないか。"""
    if bound < 1:
        raise InvalidInputError("D must be >= 1")
    for i, p in enumerate(points):
        if abs(p.disc) <= bound:
            return False, IndependenceWitness("discriminant", (i,))
    top = bound
    if bound > MAX_MODPOLY_LEVEL:
        logger.warning(
            "isogeny check capped at N <= %d (requested D=%d)",
            MAX_MODPOLY_LEVEL,
            bound,
        )
        top = MAX_MODPOLY_LEVEL
    for i in range(len(points)):
        for k in range(i + 1, len(points)):
            for level in range(1, top + 1):
                if in_XN(points[i], points[k], level, prec, cache):
                    return False, IndependenceWitness("isogeny", (i, k), level)
    return True, None
