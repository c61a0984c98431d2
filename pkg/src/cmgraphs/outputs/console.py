"""報告を標準出力に書く出力。

ログは標準エラーに出るので、標準出力には報告だけが書かれます。
"""

import sys
from typing import Any, Dict

from .render import render_report
from ..core.interfaces import Output


class ConsoleOutput(Output):
    """報告を標準出力に印刷する出力。

    設定オプション:
        format (str): "json" か "csv"（デフォルト: "json"）

    出力例（json）:
        {
          "kind": "classpoly",
          "polynomial": "X - 1728",
          ...
        }
    """

    def __init__(self, stream: Any = None) -> None:
        self._stream = stream

    async def send(self, data: Dict[str, Any], config: Dict[str, Any]) -> None:
        stream = self._stream or sys.stdout
        stream.write(render_report(data, config.get("format", "json")))
        stream.flush()
