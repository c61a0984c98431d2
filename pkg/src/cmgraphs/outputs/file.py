"""報告をファイルに書く出力。"""

from pathlib import Path
from typing import Any, Dict

import aiofiles

from .render import render_report
from ..core.interfaces import Output
from ..utils.logger import get_logger

logger = get_logger(__name__)


class FileOutput(Output):
    """報告をディスク上のファイルに書き込む出力。

    親ディレクトリは自動で作成します。

    設定オプション:
        path (str): 書き込み先（デフォルト: "report.json"）
        format (str): "json" か "csv"（デフォルト: "json"）
        append (bool): 既存ファイルに追記するか（デフォルト: False）

    設定例:
        {"path": "~/cmgraphs/scan-37a1.csv", "format": "csv"}
    """

    async def send(self, data: Dict[str, Any], config: Dict[str, Any]) -> None:
        """報告を書き込みます。

        Raises:
            OSError: ファイルを作成または書き込みできない場合
        """
        output_path = Path(config.get("path", "report.json")).expanduser()
        output_path.parent.mkdir(parents=True, exist_ok=True)
        text = render_report(data, config.get("format", "json"))
        mode = "a" if config.get("append", False) else "w"
        async with aiofiles.open(  # type: ignore
            str(output_path), mode=mode, encoding="utf-8"
        ) as f:
            await f.write(text)
        logger.info("report written to %s", output_path)
