"""センサスのジョブと結果のデータ型。

CensusEngine はジョブ（ScanJob）をキューに積み、ワーカーが純粋関数で処理して
ScanOutcome を返します。どちらも不変で、プロセス間で pickle できます。

主要コンポーネント:
- ScanJob: 一つの組（タプル）または一つの族の検査
- ScanOutcome: 検査結果と、精度不足で判定できなかった場合の診断
"""

import copy
from dataclasses import dataclass, field
from typing import Any, Optional, Tuple


@dataclass(frozen=True)
class ScanJob:
    """キューに積まれる一件の検査。

    Attributes:
        key: 組の決定的なキー（並べ替えと報告に使う）。
        complexity: 組の複雑さ（判別式の最大絶対値、または U-複雑さ）。
        kind: "tuple" または "family"。
        payload: 検査関数に渡す入力（座標の組や SpecialDesc）。
    """

    key: str
    complexity: int
    kind: str = "tuple"
    payload: Tuple[Any, ...] = ()

    def sort_key(self) -> Tuple[int, str]:
        return (self.complexity, self.key)


@dataclass(frozen=True)
class ScanOutcome:
    """検査結果。error が None でなければ records は空。"""

    key: str
    complexity: int
    kind: str = "tuple"
    records: Tuple[Any, ...] = ()
    candidates: Tuple[Any, ...] = ()
    error: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "extra", copy.deepcopy(self.extra))

    @property
    def indeterminate(self) -> bool:
        return self.error is not None

    def sort_key(self) -> Tuple[int, str]:
        return (self.complexity, self.key)
