"""X_0(N) -> E のモジュラー・パラメータ付けと Heegner 点。

z_f(tau) = sum a_n / n q^n を新形式の係数から評価し、
lambda z_f を E の周期格子で割った値を E(C) の点に移します。
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, List, Optional, Sequence, Tuple, Union

import mpmath
from sympy import Poly, primerange

from .elliptic import CurveQ, Point, ap, conductor
from .periods import ComplexPoint, Lattice2, periods, to_mpf, weierstrass_point
from ..arith.modular import MAX_MODPOLY_LEVEL, isogeny_matrices
from ..arith.quadforms import TauPoint, class_number, heegner_forms, tau_of_form
from ..core.errors import IndeterminateError, InvalidInputError
from ..numerics import DEFAULT_PREC
from ..numerics.intrel import recognize_algebraic
from ..numerics.precision import PrecComplex, as_mpc
from ..numerics.qseries import QSeries, TailModel, eval_qseries
from ..utils.logger import get_logger

logger = get_logger(__name__)

TRANSPORT_THRESHOLD = 0.05
LAMBDA_SEARCH = 12


class Newform:
    """楕円曲線に付随する重さ2の新形式の係数 a_1, a_2, ...。

    係数は要求に応じて伸ばします（一度計算した値は変わりません）。
    """

    def __init__(
        self, curve: CurveQ, level: int, coefficients: Sequence[int] = ()
    ) -> None:
        self.curve = curve
        self.level = level
        self._a: List[int] = [0, 1] if not coefficients else [0] + list(coefficients)

    @property
    def computed(self) -> int:
        return len(self._a) - 1

    def extend(self, count: int) -> None:
        """a_1..a_count を揃える。"""
        if count <= self.computed:
            return
        a = self._a + [0] * (count - self.computed)
        for p in primerange(self.computed + 1, count + 1):
            a[p] = ap(self.curve, p)
        for p in primerange(2, count + 1):
            # a_{p^k}
            pk, prev, cur = p * p, 1, a[p]
            while pk <= count:
                nxt = a[p] * cur - (0 if self.level % p == 0 else p * prev)
                if pk > self.computed:
                    a[pk] = nxt
                prev, cur = cur, nxt
                pk *= p
        for n in range(max(2, self.computed + 1), count + 1):
            if _is_prime_power(n):
                continue
            p = _smallest_prime_factor(n)
            pk = p
            while n % (pk * p) == 0:
                pk *= p
            a[n] = a[pk] * a[n // pk]
        self._a = a

    def a(self, n: int) -> int:
        self.extend(n)
        return self._a[n]

    def coefficients(self, count: int) -> List[int]:
        """[a_1, ..., a_count]。"""
        self.extend(count)
        return self._a[1 : count + 1]

    def integral_coefficients(self, count: int) -> List[Fraction]:
        """z_f 用の係数 [0, a_1/1, a_2/2, ...]（長さ count）。"""
        self.extend(max(count - 1, 1))
        return [Fraction(0)] + [Fraction(self._a[n], n) for n in range(1, count)]

    def series(self) -> QSeries:
        return QSeries("z_f", self.integral_coefficients, 0, TailModel(2.0, 0.0, 0.0))


def _smallest_prime_factor(n: int) -> int:
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return p
    return n


def _is_prime_power(n: int) -> bool:
    p = _smallest_prime_factor(n)
    while n % p == 0:
        n //= p
    return n == 1


def an_coefficients(curve: CurveQ, count: int, cache: Optional[Any] = None) -> Newform:
    """a_1..a_count を持つ Newform（素数では a_p、他はヘッケ漸化式と乗法性）。"""
    if count < 1:
        raise InvalidInputError("T must be >= 1")
    level = conductor(curve)
    key = ",".join(str(a) for a in curve.ainvs)
    if cache is not None:
        payload = cache.get("anplus", key)
        if payload is not None and len(payload["an"]) >= count:
            return Newform(curve, level, payload["an"])
    form = Newform(curve, level)
    form.extend(count)
    if cache is not None:
        payload = {"ainvs": key, "level": level, "an": form.coefficients(count)}
        cache.put("anplus", key, payload)
    return form


def _transport(tau: mpmath.mpc, level: int, max_k: int = 16) -> mpmath.mpc:
    """Gamma0(N) の元で Im tau を大きくする（z_f は周期の差しか変わらない）。"""
    best = tau
    while mpmath.im(best) < TRANSPORT_THRESHOLD:
        x, y = mpmath.re(best), mpmath.im(best)
        choice = None
        top = y
        for k in range(1, max_k + 1):
            c = level * k
            centre = int(mpmath.nint(-c * x))
            for d in (centre - 1, centre, centre + 1):
                if math.gcd(c, d) != 1:
                    continue
                im = y / ((c * x + d) ** 2 + (c * y) ** 2)
                if im > top * (1 + mpmath.mpf(10) ** -9):
                    top, choice = im, (c, d)
        if choice is None:
            break
        c, d = choice
        a = pow(d, -1, c)
        b = (a * d - 1) // c
        best = (a * best + b) / (c * best + d)
    return best


def fricke_matrix(level: int) -> Tuple[int, int, int, int]:
    return (0, -1, level, 0)


def fricke_involution(tau, level: int):
    """Atkin-Lehner (Fricke) 対合 w_N: tau -> -1 / (N tau)。"""
    if level < 1:
        raise InvalidInputError("level must be >= 1")
    value = as_mpc(tau)
    if mpmath.im(value) <= 0:
        raise InvalidInputError(f"not in upper half plane: {tau}")
    return -1 / (level * value)


class ParamMap:
    """phi: X_0(N) -> E（lambda は周期格子を合わせる有理数）。"""

    def __init__(
        self, curve: CurveQ, newform: Newform, lattice: Lattice2, lam: Fraction
    ) -> None:
        self.curve = curve
        self.newform = newform
        self.lattice = lattice
        self.lam = lam

    @property
    def level(self) -> int:
        return self.newform.level

    @property
    def prec(self) -> int:
        return self.lattice.prec

    def z_f(self, tau, prec: int) -> PrecComplex:
        """z_f(tau)（Gamma0(N) で Im tau を持ち上げてから評価）。"""
        with mpmath.workprec(prec + 32):
            moved = _transport(as_mpc(tau), self.level)
        return eval_qseries(self.newform.series(), moved, prec)

    def _z_raw(self, tau, prec: int) -> PrecComplex:
        return eval_qseries(self.newform.series(), tau, prec)

    @cached_property
    def fricke_sign(self) -> int:
        """w_N の固有値 epsilon（f | w_N = epsilon f）。"""
        prec = 64
        with mpmath.workprec(prec + 32):
            root = mpmath.sqrt(self.level)
            fixed = mpmath.mpc(0, 1) / root
            tau1 = mpmath.mpc(0, mpmath.mpf("1.1")) / root
            image = fricke_involution(tau1, self.level)
        z_fixed = self._z_raw(fixed, prec).value
        num = self._z_raw(image, prec).value - z_fixed
        ratio = num / (self._z_raw(tau1, prec).value - z_fixed)
        sign = int(mpmath.nint(mpmath.re(ratio)))
        if sign not in (1, -1) or abs(ratio - sign) > 1e-6:
            raise IndeterminateError("could not determine the Fricke eigenvalue")
        return sign

    def z_at_cusp_zero(self, prec: int) -> PrecComplex:
        """z_f(0) = (1 - epsilon) z_f(i / sqrt(N))。"""
        if self.fricke_sign == 1:
            return PrecComplex.make(0, prec)
        with mpmath.workprec(prec + 32):
            fixed = mpmath.mpc(0, 1) / mpmath.sqrt(self.level)
        return self._z_raw(fixed, prec) * 2


def _lattice_ratio(lattice: Lattice2, values: Sequence[mpmath.mpc]) -> Fraction:
    """lambda * v が全て格子に入る最小の正の有理数 lambda（分子分母 <= 12）。"""
    search = range(1, LAMBDA_SEARCH + 1)
    candidates = sorted({Fraction(p, q) for p in search for q in search})
    tol = mpmath.ldexp(1, -(lattice.prec // 4))
    for lam in candidates:
        num, den = lam.numerator, lam.denominator
        if all(lattice.contains(v * num / den, tol) for v in values):
            return lam
    raise IndeterminateError("no rational lattice-matching scalar found")


def newform_periods(newform: Newform, prec: int, count: int = 8) -> List[mpmath.mpc]:
    """z_f(gamma tau0) - z_f(tau0)（gamma = [[a, b], [N, d]]、tau0 = (-d + i)/N）。"""
    level = newform.level
    series = newform.series()
    out = []
    d = 2
    while len(out) < count and d < 10 * level + 20:
        if math.gcd(d, level) == 1:
            a = pow(d, -1, level)
            with mpmath.workprec(prec + 32):
                tau0 = mpmath.mpc(-d, 1) / level
                image = mpmath.mpc(a, 1) / level
            diff = (
                eval_qseries(series, image, prec).value
                - eval_qseries(series, tau0, prec).value
            )
            if abs(diff) > mpmath.ldexp(1, -(prec // 4)):
                out.append(diff)
        d += 1
    return out


def build_param_map(
    curve: CurveQ, prec: int = DEFAULT_PREC, cache: Optional[Any] = None
) -> ParamMap:
    """周期格子を計算し、z_f の周期格子と合わせる lambda を決めて ParamMap を作る。"""
    level = conductor(curve)
    lattice = periods(curve, prec)
    terms = int(prec * math.log(2) * level / (2 * math.pi)) + 64
    newform = an_coefficients(curve, terms, cache)
    found = newform_periods(newform, prec)
    if not found:
        raise IndeterminateError("no nonzero newform periods found")
    lam = _lattice_ratio(lattice, found)
    logger.info(
        "%s: N=%d, lambda=%s, %d periods checked", curve, level, lam, len(found)
    )
    return ParamMap(curve, newform, lattice, lam)


@dataclass(frozen=True)
class PhiValue:
    """phi(tau): 格子で簡約した z と E(C) の点。"""

    z: PrecComplex
    point: ComplexPoint


def _lattice_for(pm: ParamMap, prec: int) -> Lattice2:
    return pm.lattice if prec <= pm.prec else periods(pm.curve, prec)


def _as_tau(tau, prec: int) -> mpmath.mpc:
    if isinstance(tau, TauPoint):
        return tau_of_form(tau.form, prec + 32).value.value
    return as_mpc(tau)


def phi_eval(
    pm: ParamMap,
    tau: Union[str, int, Fraction, TauPoint, Any],
    prec: Optional[int] = None,
) -> PhiValue:
    """phi(tau)。tau は上半平面の点かカスプ。

    カスプは "oo" と有理数 a/c。N | c なら oo に、gcd(c, N) = 1 なら 0 に
    Gamma_0(N) 同値です。それ以外の c は扱いません。
    """
    prec = prec or pm.prec
    lattice = _lattice_for(pm, prec)
    if isinstance(tau, str):
        if tau.strip().lower() not in ("oo", "inf", "infinity", "i*oo"):
            raise InvalidInputError(f"unsupported cusp: {tau!r}")
        raw = PrecComplex.make(0, prec)
    elif isinstance(tau, (int, Fraction)):
        cusp = Fraction(tau)
        width = math.gcd(cusp.denominator, pm.level)
        if width == pm.level:
            raw = PrecComplex.make(0, prec)
        elif width == 1:
            raw = pm.z_at_cusp_zero(prec)
        else:
            raise InvalidInputError(f"unsupported cusp: {cusp}")
    else:
        raw = pm.z_f(_as_tau(tau, prec), prec)
    with mpmath.workprec(prec + 32):
        scaled = raw.value * pm.lam.numerator / pm.lam.denominator
        z = lattice.reduce(scaled)
    err = raw.err * to_mpf(abs(pm.lam)) + lattice.omega1.err + lattice.omega2.err
    z_value = PrecComplex.rounded(z, prec, err)
    return PhiValue(z_value, weierstrass_point(pm.curve, lattice, z))


def torsion_order_of(pm: ParamMap, z: PrecComplex, limit: int = 12) -> int:
    """z が格子の limit 以下の位数のねじれ点なら位数、そうでなければ 0。"""
    lattice = _lattice_for(pm, z.prec)
    for n in range(1, limit + 1):
        if lattice.contains(z.value * n):
            return n
    return 0


def recognize_rational_point(
    curve: CurveQ, point: ComplexPoint, prec: int
) -> Optional[Point]:
    """数値点が E(Q) の点なら厳密な有理点を返す。"""
    if point.infinity:
        return Point.infinity()
    poly = recognize_algebraic(point.x, prec, 1)
    if poly is None or poly.degree() != 1:
        return None
    c1, c0 = (int(c) for c in poly.all_coeffs())
    x = Fraction(-c0, c1)
    disc = 4 * x**3 + curve.b2 * x * x + 2 * curve.b4 * x + curve.b6
    if disc < 0:
        return None
    num, den = math.isqrt(disc.numerator), math.isqrt(disc.denominator)
    if num * num != disc.numerator or den * den != disc.denominator:
        return None
    root = Fraction(num, den)
    options = [Point(x, (-(curve.a1 * x + curve.a3) + s) / 2) for s in (root, -root)]
    with mpmath.workprec(prec):
        best = min(options, key=lambda p: abs(to_mpf(p.y) - point.y))
        if abs(to_mpf(best.y) - point.y) > mpmath.ldexp(1, -(prec // 4)):
            return None
    return best


@dataclass(frozen=True)
class HeegnerConjugate:
    tau: TauPoint
    z: PrecComplex
    point: ComplexPoint
    x_poly: Optional[Poly]
    rational: Optional[Point]


@dataclass(frozen=True)
class HeegnerResult:
    """判別式 disc の Heegner 点の共役全体とトレース。"""

    disc: int
    level: int
    conjugates: Tuple[HeegnerConjugate, ...]
    trace_z: PrecComplex
    trace_point: ComplexPoint
    trace_rational: Optional[Point]


def heegner_point(pm: ParamMap, disc: int, prec: Optional[int] = None) -> HeegnerResult:
    """各 Heegner 形式で phi を評価し、x 座標を類数以下の次数で認識する。"""
    prec = prec or pm.prec
    forms = heegner_forms(disc, pm.level)
    if not forms:
        raise InvalidInputError(f"Heegner hypothesis fails for d={disc}, N={pm.level}")
    h = class_number(disc)
    conjugates = []
    total = mpmath.mpc(0)
    total_err = mpmath.mpf(0)
    for form in forms:
        tau = tau_of_form(form, prec)
        value = phi_eval(pm, tau, prec)
        x_poly = None
        if not value.point.infinity:
            x_poly = recognize_algebraic(value.point.x, prec, h)
        rational = None
        if x_poly is not None and x_poly.degree() == 1:
            rational = recognize_rational_point(pm.curve, value.point, prec)
        conjugates.append(HeegnerConjugate(tau, value.z, value.point, x_poly, rational))
        with mpmath.workprec(prec + 32):
            total += value.z.value
        total_err += value.z.err
    lattice = _lattice_for(pm, prec)
    with mpmath.workprec(prec + 32):
        trace = lattice.reduce(total)
    trace_point = weierstrass_point(pm.curve, lattice, trace)
    trace_rational = recognize_rational_point(pm.curve, trace_point, prec)
    logger.debug(
        "Heegner d=%d: %d conjugates, trace %s", disc, len(forms), trace_rational
    )
    return HeegnerResult(
        disc,
        pm.level,
        tuple(conjugates),
        PrecComplex.rounded(trace, prec, total_err),
        trace_point,
        trace_rational,
    )


@dataclass(frozen=True)
class CorrespondenceSpec:
    """V = phi ∘（次数 M のヘッケ対応）。M = 1 は phi のグラフ。"""

    param: ParamMap
    degree: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.degree <= MAX_MODPOLY_LEVEL:
            raise InvalidInputError(
                f"Hecke degree {self.degree} out of supported range"
            )


@dataclass(frozen=True)
class VImage:
    tau: mpmath.mpc
    value: PhiValue


def v_images(
    spec: CorrespondenceSpec,
    point: Union[TauPoint, Any],
    prec: Optional[int] = None,
) -> List[VImage]:
    """s の V-像（M > 1 なら (a tau + b)/d の psi(M) 個の点での phi）。"""
    prec = prec or spec.param.prec
    with mpmath.workprec(prec + 32):
        tau = _as_tau(point, prec)
        targets = [(a * tau + b) / d for a, b, d in isogeny_matrices(spec.degree)]
    return [VImage(t, phi_eval(spec.param, t, prec)) for t in targets]
