"""Masser の係数上界。

n 個の点の Neron-Tate 高さが q 以下、非ねじれ点の高さが eta 以上のとき、
関係格子は各係数が

    n^(n-1) * omega * (q / eta)^((n-1)/2)

以下の基底を持ちます。CM の場合は E^(2n) で考えて

    (2n)^(2n-1) * omega * (q / eta)^((2n-1)/2)

になります（係数 a + b rho のノルムは max(|a|, |b|)）。
"""

from dataclasses import dataclass

import mpmath

from ..core.errors import InvalidInputError


@dataclass(frozen=True)
class MasserInput:
    """上界の入力。omega はねじれ部分群の位数。"""

    n: int
    omega: int
    q: mpmath.mpf
    eta: mpmath.mpf
    cm: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError(f"number of points must be >= 1 (got {self.n})")
        if self.omega < 1:
            raise InvalidInputError(
                f"torsion cardinality must be >= 1 (got {self.omega})"
            )
        if not self.eta > 0:
            raise InvalidInputError("height floor eta must be positive")
        if self.q < self.eta:
            raise InvalidInputError(
                f"height bound q={self.q} is below the height floor eta={self.eta}"
            )


def masser_bound(mi: MasserInput) -> mpmath.mpf:
    """係数の上界（丸めない実数値）。"""
    ratio = mpmath.mpf(mi.q) / mpmath.mpf(mi.eta)
    n = 2 * mi.n if mi.cm else mi.n
    return mpmath.mpf(n) ** (n - 1) * mi.omega * mpmath.sqrt(ratio) ** (n - 1)


def coefficient_bound(mi: MasserInput) -> int:
    """探索で使う整数の上界 ceil(masser_bound)。"""
    # 浮動小数の誤差で 20.000...01 を 21 にしない
    value = masser_bound(mi)
    nearest = int(mpmath.nint(value))
    if abs(value - nearest) < mpmath.mpf(10) ** -20 * max(1, nearest):
        return max(1, nearest)
    return max(1, int(mpmath.ceil(value)))
