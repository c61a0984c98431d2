"""誤差半径付きの多倍長複素数。

``PrecComplex`` は値・作業精度（ビット）・絶対誤差半径の三つ組です。
四則演算は誤差半径を単調に伝播し、結果の ``err`` は入力誤差と丸め誤差の
両方を上から押さえます。値は生成後に変更されません。
"""

from dataclasses import dataclass
from typing import Union

import mpmath
from mpmath import mpc, mpf

from . import MIN_PREC
from ..core.errors import InvalidInputError

Number = Union[int, float, str, mpf, mpc, complex]


def rounding_radius(value: Union[mpf, mpc], prec: int) -> mpf:
    """``prec`` ビットで ``value`` を丸めたときの誤差上界。"""
    with mpmath.workprec(prec + 16):
        return abs(value) * mpmath.ldexp(1, 1 - prec) + mpmath.ldexp(1, -4 * prec)


@dataclass(frozen=True)
class PrecComplex:
    """誤差半径付きの複素数。

    属性:
        value: 中心値（mpc）
        prec: 作業精度（ビット、64以上）
        err: 非負の絶対誤差半径
    """

    value: mpc
    prec: int
    err: mpf

    def __post_init__(self) -> None:
        if self.prec < MIN_PREC:
            raise InvalidInputError(f"precision must be >= {MIN_PREC} bits")
        if self.err < 0:
            raise InvalidInputError("error radius must be nonnegative")

    @classmethod
    def make(cls, value: Number, prec: int, err: Number = 0) -> "PrecComplex":
        """値を ``prec`` ビットに丸めて生成。丸め誤差は ``err`` に加算されない。"""
        with mpmath.workprec(prec):
            z = mpmath.mpc(value)
        return cls(z, prec, mpmath.mpf(err))

    @classmethod
    def rounded(cls, value: Number, prec: int, err: Number = 0) -> "PrecComplex":
        """丸め誤差を誤差半径に含めて生成。"""
        with mpmath.workprec(prec):
            z = mpmath.mpc(value)
        return cls(z, prec, mpmath.mpf(err) + rounding_radius(z, prec))

    @property
    def re(self) -> mpf:
        return self.value.real

    @property
    def im(self) -> mpf:
        return self.value.imag

    def __abs__(self) -> mpf:
        with mpmath.workprec(self.prec):
            return abs(self.value)

    def _coerce(self, other: Union["PrecComplex", Number]) -> "PrecComplex":
        if isinstance(other, PrecComplex):
            return other
        return PrecComplex.make(other, self.prec)

    def __add__(self, other: Union["PrecComplex", Number]) -> "PrecComplex":
        o = self._coerce(other)
        prec = min(self.prec, o.prec)
        with mpmath.workprec(prec):
            v = self.value + o.value
        return PrecComplex(v, prec, self.err + o.err + rounding_radius(v, prec))

    __radd__ = __add__

    def __neg__(self) -> "PrecComplex":
        return PrecComplex(-self.value, self.prec, self.err)

    def __sub__(self, other: Union["PrecComplex", Number]) -> "PrecComplex":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> "PrecComplex":
        return self._coerce(other) - self

    def __mul__(self, other: Union["PrecComplex", Number]) -> "PrecComplex":
        o = self._coerce(other)
        prec = min(self.prec, o.prec)
        with mpmath.workprec(prec + 16):
            err = abs(self.value) * o.err + abs(o.value) * self.err + self.err * o.err
        with mpmath.workprec(prec):
            v = self.value * o.value
        return PrecComplex(v, prec, err + rounding_radius(v, prec))

    __rmul__ = __mul__

    def __truediv__(self, other: Union["PrecComplex", Number]) -> "PrecComplex":
        o = self._coerce(other)
        prec = min(self.prec, o.prec)
        with mpmath.workprec(prec + 16):
            denom = abs(o.value)
            if denom <= o.err:
                raise InvalidInputError("division by an interval containing zero")
            # |a/b - a'/b'| <= (|a| e_b + |b| e_a) / (|b| (|b| - e_b))
            num = abs(self.value) * o.err + denom * self.err
            err = num / (denom * (denom - o.err))
        with mpmath.workprec(prec):
            v = self.value / o.value
        return PrecComplex(v, prec, err + rounding_radius(v, prec))

    def __rtruediv__(self, other: Number) -> "PrecComplex":
        return self._coerce(other) / self

    def with_err(self, extra: Number) -> "PrecComplex":
        """誤差半径を ``extra`` だけ膨らませたコピー。"""
        return PrecComplex(self.value, self.prec, self.err + mpmath.mpf(extra))

    def contains(self, value: Number) -> bool:
        """``value`` が誤差円板内にあるか。"""
        with mpmath.workprec(self.prec + 16):
            return abs(self.value - mpmath.mpc(value)) <= self.err

    def is_certainly_zero_free(self) -> bool:
        return abs(self) > self.err

    def __repr__(self) -> str:
        return (
            f"PrecComplex({mpmath.nstr(self.value, 20)}, prec={self.prec}, "
            f"err={mpmath.nstr(self.err, 3)})"
        )


def as_mpc(z: Union[PrecComplex, Number]) -> mpc:
    """PrecComplexまたは数値から中心値を取り出す。"""
    if isinstance(z, PrecComplex):
        return z.value
    return mpmath.mpc(z)


def format_real(value: Union[mpf, int, float], err: Union[mpf, int, float] = 0) -> str:
    """誤差半径に見合う有効桁で実数を文字列化する。

    ``err`` が0なら17桁。それ以外は誤差の桁より2桁下までを出力します。
    """
    v = mpmath.mpf(value)
    e = abs(mpmath.mpf(err))
    if e == 0 or v == 0:
        digits = 17
    else:
        scale = mpmath.floor(mpmath.log10(abs(v))) - mpmath.floor(mpmath.log10(e))
        digits = int(max(3, min(60, scale + 2)))
    return mpmath.nstr(v, digits, strip_zeros=True, min_fixed=-6, max_fixed=18)
