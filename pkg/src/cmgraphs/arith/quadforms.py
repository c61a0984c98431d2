"""虚二次判別式と二元二次形式。

特殊点（CM点・Heegner点）はすべてここで列挙される形式から作られます。
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import mpmath
from sympy import Poly, Symbol
from sympy.ntheory import sqrt_mod

from ..core.errors import IndeterminateError, InternalError, InvalidInputError
from ..numerics import DEFAULT_PREC
from ..numerics.precision import PrecComplex
from ..utils.logger import get_logger

logger = get_logger(__name__)

X = Symbol("X")
MAX_PREC_DOUBLINGS = 6


class QuadForm(NamedTuple):
    """正定値原始二元二次形式 a x^2 + b xy + c y^2。"""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self
        if not (abs(b) <= a <= c):
            return False
        return b >= 0 or (abs(b) != a and a != c)

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


@dataclass(frozen=True)
class TauPoint:
    """形式の根 tau = (-b + sqrt(disc)) / (2a) と、その数値的な影。"""

    form: QuadForm
    value: PrecComplex

    @property
    def disc(self) -> int:
        return self.form.disc


def validate_discriminant(d: int) -> int:
    if not isinstance(d, int) or d >= 0 or d % 4 not in (0, 1):
        raise InvalidInputError(f"invalid discriminant: {d}")
    return d


def reduce_form(form: Sequence[int]) -> QuadForm:
    """正定値形式を同値な簡約形式に移す。"""
    a, b, c = form
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise InvalidInputError(f"form {tuple(form)} is not positive definite")
    while True:
        if b > a or b <= -a:
            # b を (-a, a] に平行移動
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QuadForm(a, b, c)


def reduced_forms(d: int) -> List[QuadForm]:
    """判別式 d の原始簡約形式の一覧（辞書式順）。"""
    validate_discriminant(d)
    forms = []
    a_max = math.isqrt(-d // 3)
    for a in range(1, a_max + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            f = QuadForm(a, b, c)
            if c >= a and f.is_reduced() and math.gcd(a, b, c) == 1:
                forms.append(f)
    return sorted(forms)


def class_number(d: int) -> int:
    return len(reduced_forms(d))


def _smallest_root(d: int, modulus: int) -> Optional[int]:
    roots = sqrt_mod(d % modulus, modulus, all_roots=True)
    if not roots:
        return None
    return min(int(r) for r in roots)


def heegner_forms(d: int, level: int, max_a: int = 100000) -> List[QuadForm]:
    """各類から一つずつ、N | a かつ b ≡ beta (mod 2N) を満たす形式を選ぶ。

    beta は d の 4N を法とする平方根のうち最小の非負のもの。
    d が 4N を法として平方でなければ空リスト。
    """
    validate_discriminant(d)
    if level < 1:
        raise InvalidInputError("level must be >= 1")
    beta = _smallest_root(d, 4 * level)
    if beta is None:
        return []
    h = class_number(d)
    found: Dict[QuadForm, QuadForm] = {}
    for k in range(1, max_a + 1):
        a = level * k
        for b in range(beta % (2 * level), 2 * a, 2 * level):
            if b > a:
                b -= 2 * a
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if math.gcd(a, b, c) != 1:
                continue
            rep = reduce_form((a, b, c))
            if rep not in found:
                found[rep] = QuadForm(a, b, c)
        if len(found) == h:
            break
    else:
        raise InternalError(f"heegner form search exhausted for d={d}, N={level}")
    return [found[rep] for rep in sorted(found)]


def tau_of_form(form: Sequence[int], prec: int = DEFAULT_PREC) -> TauPoint:
    """形式の上半平面内の根。"""
    f = QuadForm(*form)
    d = f.disc
    if f.a <= 0 or d >= 0:
        raise InvalidInputError(f"form {tuple(form)} is not positive definite")
    with mpmath.workprec(prec + 16):
        tau = mpmath.mpc(-f.b, mpmath.sqrt(-d)) / (2 * f.a)
    return TauPoint(f, PrecComplex.rounded(tau, prec))


def act_on_form(matrix: Sequence[Sequence[int]], form: Sequence[int]) -> QuadForm:
    """根 tau を M tau に移したときの原始形式（det M > 0）。"""
    (p, q), (r, s) = matrix
    if p * s - q * r <= 0:
        raise InvalidInputError("matrix must have positive determinant")
    a, b, c = form
    na = a * s * s - b * s * r + c * r * r
    nb = -2 * a * s * q + b * (s * p + q * r) - 2 * c * r * p
    nc = a * q * q - b * q * p + c * p * p
    g = math.gcd(na, nb, nc)
    if na < 0:
        g = -g
    return QuadForm(na // g, nb // g, nc // g)


def _classpoly_bits(d: int) -> int:
    total = sum(math.pi * math.sqrt(-d) / f.a for f in reduced_forms(d))
    return int(total / math.log(2)) + 10 * class_number(d) + 64


def _classpoly_attempt(d: int, bits: int) -> Optional[List[int]]:
    from .modular import j_invariant

    with mpmath.workprec(bits + 32):
        coeffs = [mpmath.mpc(1)]
        for f in reduced_forms(d):
            j = j_invariant(tau_of_form(f, bits + 32), bits + 32).value
            nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i] += c
                nxt[i + 1] -= j * c
            coeffs = nxt
        quarter = mpmath.mpf(1) / 4
        out = []
        for c in coeffs:
            n = mpmath.nint(c.real)
            if abs(c.real - n) >= quarter or abs(c.imag) >= quarter:
                return None
            out.append(int(n))
    return out


@lru_cache(maxsize=256)
def _classpoly_cached(d: int, start: int) -> Tuple[int, ...]:
    bits = start
    for _ in range(MAX_PREC_DOUBLINGS):
        coeffs = _classpoly_attempt(d, bits)
        if coeffs is not None:
            return tuple(coeffs)
        logger.info("H_%d: rounding failed at %d bits, doubling", d, bits)
        bits *= 2
    raise IndeterminateError(f"could not round Hilbert class polynomial for d={d}")


def hilbert_class_poly(
    d: int, prec: Optional[int] = None, cache: Optional[Any] = None
) -> Poly:
    """ヒルベルト類多項式 H_d = prod (X - j(tau_f))（係数は上位から）。

    ``prec`` ビットから始め、丸めに失敗すれば倍にします。係数の大きさの
    見積もりより小さい ``prec`` は見積もりまで引き上げます。
    """
    validate_discriminant(d)
    if prec is not None and prec < 1:
        raise InvalidInputError(f"precision must be positive, got {prec}")
    if cache is not None:
        payload = cache.get("classpoly", str(d))
        if payload is not None:
            return Poly(payload["coeffs"], X)
    needed = _classpoly_bits(d)
    start = needed if prec is None else max(prec, needed)
    if prec is not None and prec < needed:
        logger.debug("H_%d: raising %d bits to %d", d, prec, needed)
    coeffs = list(_classpoly_cached(d, start))
    if cache is not None:
        cache.put("classpoly", str(d), {"disc": d, "coeffs": coeffs})
    return Poly(coeffs, X)
