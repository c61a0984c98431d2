"""周期格子・ワイエルシュトラス関数・楕円対数・自己準同型環。

格子は Lambda = Z omega1 + Z omega2（Im(omega2/omega1) > 0）で、
不変微分 dx / (2y + a1 x + a3) に関する周期です。
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import mpmath

from .elliptic import CurveQ, Point
from ..arith.modular import reduce_to_fundamental_domain
from ..core.errors import IndeterminateError, InternalError
from ..numerics import DEFAULT_PREC
from ..numerics.precision import PrecComplex, as_mpc
from ..numerics.qseries import E4_SERIES, E6_SERIES, eval_qseries
from ..utils.logger import get_logger

logger = get_logger(__name__)

GUARD = 32


def to_mpf(value) -> mpmath.mpf:
    """Fraction または整数を現在の精度の mpf に。"""
    value = Fraction(value)
    return mpmath.mpf(value.numerator) / value.denominator


@dataclass(frozen=True)
class Lattice2:
    """周期格子の基底。"""

    omega1: PrecComplex
    omega2: PrecComplex
    real_components: int

    @property
    def prec(self) -> int:
        return min(self.omega1.prec, self.omega2.prec)

    @property
    def tau(self) -> mpmath.mpc:
        with mpmath.workprec(self.prec + GUARD):
            return self.omega2.value / self.omega1.value

    @property
    def real_volume(self) -> mpmath.mpf:
        """実周期（E(R) の成分数 × 実の基本周期）。"""
        with mpmath.workprec(self.prec):
            return self.real_components * abs(self.omega1.value)

    def coordinates(self, z) -> Tuple[mpmath.mpf, mpmath.mpf]:
        """z = u omega1 + v omega2 となる実数 (u, v)。"""
        with mpmath.workprec(self.prec + GUARD):
            w1, w2, z = self.omega1.value, self.omega2.value, as_mpc(z)
            det = mpmath.im(mpmath.conj(w1) * w2)
            u = mpmath.im(z * mpmath.conj(w2)) / -det
            v = mpmath.im(mpmath.conj(w1) * z) / det
            return u, v

    def reduce(self, z) -> mpmath.mpc:
        """z を基本平行四辺形 {u omega1 + v omega2 : 0 <= u, v < 1} に移す。"""
        u, v = self.coordinates(z)
        with mpmath.workprec(self.prec + GUARD):
            u -= mpmath.floor(u)
            v -= mpmath.floor(v)
            tol = mpmath.ldexp(1, -(self.prec // 2))
            if abs(u - 1) < tol:
                u = mpmath.mpf(0)
            if abs(v - 1) < tol:
                v = mpmath.mpf(0)
            return u * self.omega1.value + v * self.omega2.value

    def contains(self, z, tol=None) -> bool:
        u, v = self.coordinates(z)
        with mpmath.workprec(self.prec):
            tol = tol if tol is not None else mpmath.ldexp(1, -(self.prec // 2))
            return abs(u - mpmath.nint(u)) < tol and abs(v - mpmath.nint(v)) < tol

    def reduced_basis(self) -> Tuple[mpmath.mpc, mpmath.mpc]:
        """tau = omega2/omega1 が SL2(Z) の基本領域に入る基底。"""
        _, g = reduce_to_fundamental_domain(self.tau, self.prec)
        with mpmath.workprec(self.prec + GUARD):
            w1, w2 = self.omega1.value, self.omega2.value
            return g.c * w2 + g.d * w1, g.a * w2 + g.b * w1


def two_torsion_roots(curve: CurveQ, prec: int) -> list:
    """4x^3 + b2 x^2 + 2 b4 x + b6 の根。判別式が正なら降順の実数。"""
    coeffs = [4, curve.b2, 2 * curve.b4, curve.b6]
    with mpmath.workprec(prec + GUARD):
        roots = mpmath.polyroots(
            [to_mpf(c) for c in coeffs], maxsteps=200, extraprec=prec
        )
        if curve.disc > 0:
            return sorted((mpmath.re(r) for r in roots), reverse=True)
        idx = min(range(3), key=lambda i: abs(mpmath.im(roots[i])))
        real = roots[idx]
        others = [r for i, r in enumerate(roots) if i != idx]
        others.sort(key=lambda r: mpmath.im(r), reverse=True)
        return [mpmath.re(real)] + others


def periods(curve: CurveQ, prec: int = DEFAULT_PREC) -> Lattice2:
    """AGM による周期格子。"""
    wp = prec + GUARD
    roots = two_torsion_roots(curve, prec)
    with mpmath.workprec(wp):
        pi = mpmath.pi
        if curve.disc > 0:
            e1, e2, e3 = roots
            w1 = pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            w2 = 1j * pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3))
            components = 2
        else:
            e1 = roots[0]
            b2, b4 = to_mpf(curve.b2), to_mpf(curve.b4)
            a = 3 * e1 + b2 / 4
            b = mpmath.sqrt(3 * e1 * e1 + b2 / 2 * e1 + b4 / 2)
            w1 = 2 * pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b + a))
            agm2 = mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b - a))
            w2 = -w1 / 2 + 1j * pi / agm2
            components = 1
        if not (mpmath.isfinite(w1) and mpmath.isfinite(mpmath.re(w2))):
            raise InternalError("AGM did not converge")
        err1 = abs(w1) * mpmath.ldexp(1, 8 - prec)
        err2 = abs(w2) * mpmath.ldexp(1, 8 - prec)
    return Lattice2(
        PrecComplex.rounded(mpmath.mpc(w1), prec, err1),
        PrecComplex.rounded(mpmath.mpc(w2), prec, err2),
        components,
    )


def lattice_invariants(lattice: Lattice2) -> Tuple[PrecComplex, PrecComplex]:
    """格子から復元した (c4, c6)。"""
    prec = lattice.prec
    w1, w2 = lattice.reduced_basis()
    with mpmath.workprec(prec + GUARD):
        tau = w2 / w1
        scale = 2 * mpmath.pi / w1
    e4 = eval_qseries(E4_SERIES, tau, prec)
    e6 = eval_qseries(E6_SERIES, tau, prec)
    with mpmath.workprec(prec + GUARD):
        s4 = scale**4
        s6 = scale**6
    return e4 * PrecComplex.make(s4, prec), e6 * PrecComplex.make(s6, prec)


@dataclass(frozen=True)
class ComplexPoint:
    """E(C) の点。infinity が真なら x, y は無視される。"""

    x: mpmath.mpc
    y: mpmath.mpc
    err: mpmath.mpf
    infinity: bool = False


def _theta_data(lattice: Lattice2, z, wp: int):
    w1, w2 = lattice.reduced_basis()
    with mpmath.workprec(wp):
        q = mpmath.exp(1j * mpmath.pi * (w2 / w1))
        v = mpmath.pi * as_mpc(z) / w1
        scale = mpmath.pi / w1
        t3 = mpmath.jtheta(3, 0, q)
        t4 = mpmath.jtheta(4, 0, q)
        return q, v, scale, t3, t4


def weierstrass_p(lattice: Lattice2, z) -> Tuple[mpmath.mpc, mpmath.mpc]:
    """(wp(z), wp'(z))。z が格子点に近い場合は ``IndeterminateError``。"""
    wp = lattice.prec + GUARD
    q, v, scale, t3, t4 = _theta_data(lattice, z, wp)
    with mpmath.workprec(wp):
        th1 = mpmath.jtheta(1, v, q)
        if abs(th1) < mpmath.ldexp(1, -(lattice.prec // 2)):
            raise IndeterminateError("z is too close to a lattice point")
        th2 = mpmath.jtheta(2, v, q)
        d1 = mpmath.jtheta(1, v, q, 1)
        d2 = mpmath.jtheta(2, v, q, 1)
        amp = scale * t3 * t4 * th2 / th1
        amp_prime = scale * scale * t3 * t4 * (d2 * th1 - th2 * d1) / (th1 * th1)
        e1 = scale * scale * (t3**4 + t4**4) / 3
        return e1 + amp * amp, 2 * amp * amp_prime


def weierstrass_point(curve: CurveQ, lattice: Lattice2, z) -> ComplexPoint:
    """z に対応する E(C) の点（z が格子点なら無限遠点）。"""
    prec = lattice.prec
    if lattice.contains(z):
        return ComplexPoint(mpmath.mpc(0), mpmath.mpc(0), mpmath.mpf(0), True)
    p_val, p_der = weierstrass_p(lattice, z)
    with mpmath.workprec(prec + GUARD):
        x = p_val - to_mpf(curve.b2) / 12
        y = (p_der - to_mpf(curve.a1) * x - to_mpf(curve.a3)) / 2
        err = (abs(x) + abs(y) + 1) * mpmath.ldexp(1, 16 - prec)
    return ComplexPoint(x, y, err)


def _egg_start(lattice: Lattice2, target_x) -> mpmath.mpc:
    """有界な実成分上の点の初期値。wp(omega2/2 + t) は t in [0, omega1/2] で単調増加。"""
    w1, w2 = lattice.omega1.value, lattice.omega2.value
    lo, hi = mpmath.mpf(0), mpmath.re(w1) / 2
    for _ in range(60):
        mid = (lo + hi) / 2
        value, _ = weierstrass_p(lattice, w2 / 2 + mid)
        if mpmath.re(value) < target_x:
            lo = mid
        else:
            hi = mid
    return w2 / 2 + (lo + hi) / 2


def _half_period(lattice: Lattice2, target_x) -> mpmath.mpc:
    """2等分点 omega1/2, omega2/2, (omega1+omega2)/2 のうち wp が target_x に最も近いもの。"""
    w1, w2 = lattice.omega1.value, lattice.omega2.value
    candidates = [w1 / 2, w2 / 2, (w1 + w2) / 2]
    return min(candidates, key=lambda z: abs(weierstrass_p(lattice, z)[0] - target_x))


def elliptic_log(curve: CurveQ, lattice: Lattice2, point: Point) -> PrecComplex:
    """有理点の楕円対数（基本平行四辺形内の代表元）。"""
    prec = lattice.prec
    if point.is_infinity:
        return PrecComplex.make(0, prec)
    if 2 * point.y + curve.a1 * point.x + curve.a3 == 0:
        with mpmath.workprec(prec + GUARD):
            z = _half_period(lattice, to_mpf(point.x) + to_mpf(curve.b2) / 12)
            z = lattice.reduce(z)
        return PrecComplex.rounded(z, prec, mpmath.ldexp(abs(z) + 1, 16 - prec))
    roots = two_torsion_roots(curve, prec)
    wp = prec + GUARD
    with mpmath.workprec(wp):
        x = to_mpf(point.x)
        target_x = x + to_mpf(curve.b2) / 12
        target_y = 2 * to_mpf(point.y) + to_mpf(curve.a1) * x + to_mpf(curve.a3)
        on_egg = curve.disc > 0 and x < roots[0]
        if not on_egg:
            z = mpmath.elliprf(*(mpmath.mpc(x - e) for e in roots))
    if on_egg:
        z = _egg_start(lattice, target_x)
    for _ in range(6):
        p_val, p_der = weierstrass_p(lattice, z)
        with mpmath.workprec(wp):
            if abs(p_der + target_y) < abs(p_der - target_y):
                z = -z
                continue
            delta = p_val - target_x
            if abs(delta) <= mpmath.ldexp(abs(target_x) + 1, 16 - wp):
                break
            z = z - delta / p_der
    with mpmath.workprec(wp):
        z = lattice.reduce(z)
    check = weierstrass_point(curve, lattice, z) if not lattice.contains(z) else None
    if check is not None:
        with mpmath.workprec(prec):
            miss = abs(check.x - x) + abs(check.y - to_mpf(point.y))
            if miss > mpmath.ldexp(1, -(prec // 2)):
                raise IndeterminateError("elliptic logarithm failed to round-trip")
    return PrecComplex.rounded(z, prec, mpmath.ldexp(abs(z) + 1, 16 - prec))


CM_DISCRIMINANTS = (-3, -4, -7, -8, -11, -12, -16, -19, -27, -28, -43, -67, -163)


@dataclass(frozen=True)
class EndRing:
    """End(E)。CM なら rho = (delta + sqrt(disc)) / 2 とその格子への作用を持つ。

    action は rho * omega_i = action[i][0] omega1 + action[i][1] omega2。
    """

    disc: Optional[int] = None
    action: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None

    @property
    def is_cm(self) -> bool:
        return self.disc is not None

    @property
    def rho_trace(self) -> int:
        return 0 if self.disc is None else self.disc % 2

    @property
    def rho_norm(self) -> int:
        if self.disc is None:
            return 0
        return (self.rho_trace**2 - self.disc) // 4

    def rho(self, prec: int) -> mpmath.mpc:
        with mpmath.workprec(prec):
            return (self.rho_trace + mpmath.sqrt(mpmath.mpc(self.disc))) / 2

    def __str__(self) -> str:
        return "Z" if self.disc is None else f"O({self.disc})"


def cm_j_invariants() -> dict:
    """類数1の13個の判別式に対する j 値（ヒルベルト類多項式の根として計算）。"""
    from ..arith.quadforms import hilbert_class_poly

    return {d: -int(hilbert_class_poly(d).all_coeffs()[-1]) for d in CM_DISCRIMINANTS}


def endomorphism_ring(curve: CurveQ, lattice: Optional[Lattice2] = None) -> EndRing:
    """j(E) を CM の j 値と照合し、CM なら rho の格子への作用を確認する。"""
    j = curve.j
    if j.denominator != 1:
        return EndRing()
    matches = [d for d, jd in cm_j_invariants().items() if jd == j]
    if not matches:
        return EndRing()
    disc = matches[0]
    lattice = lattice or periods(curve)
    ring = EndRing(disc)
    prec = lattice.prec
    rho = ring.rho(prec + GUARD)
    rows = []
    tol = mpmath.ldexp(1, -(prec // 2))
    for w in (lattice.omega1.value, lattice.omega2.value):
        u, v = lattice.coordinates(rho * w)
        ru, rv = int(mpmath.nint(u)), int(mpmath.nint(v))
        if abs(u - ru) > tol or abs(v - rv) > tol:
            raise InternalError(
                f"rho does not preserve the period lattice (disc {disc})"
            )
        rows.append((ru, rv))
    logger.debug("%s: CM by discriminant %d, action %s", curve, disc, rows)
    return EndRing(disc, (rows[0], rows[1]))
