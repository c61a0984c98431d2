"""報告の出力先の共通インターフェース。

報告は JSON に直せる辞書で、出力は書式（json / csv）に従ってそれを書き出します。
同じ報告と設定からは常にバイト単位で同じ出力が得られなければなりません。
"""

from abc import ABC, abstractmethod
from typing import Any, Dict


class Output(ABC):
    """報告を書き出す出力の基底インターフェース。

    実装例:
        >>> class MemoryOutput(Output):
        ...     async def send(self, data, config):
        ...         self.last = render_report(data, config.get("format", "json"))
    """

    @abstractmethod
    async def send(self, data: Dict[str, Any], config: Dict[str, Any]) -> None:
        """報告を書き出します。

        Args:
            data: 報告（"kind"、"provenance" と各種の結果を持つ辞書）。
            config: 出力固有の設定。"format" は "json" か "csv"。
        """
        pass
