"""FileOutput のテストモジュール。"""

import pytest

from src.cmgraphs.outputs.file import FileOutput


class TestFileOutput:
    """FileOutput のテストケース。"""

    @pytest.mark.asyncio
    async def test_writes_file(self, tmp_path):
        """親ディレクトリを作って報告を書くことをテスト。"""
        path = tmp_path / "out" / "report.json"
        await FileOutput().send({"kind": "x"}, {"path": str(path)})
        assert path.read_text(encoding="utf-8") == '{\n  "kind": "x"\n}\n'

    @pytest.mark.asyncio
    async def test_overwrite_and_append(self, tmp_path):
        """既定では上書き、append なら追記になることをテスト。"""
        path = tmp_path / "report.csv"
        config = {"path": str(path), "format": "csv"}
        await FileOutput().send({"kind": "a"}, config)
        await FileOutput().send({"kind": "b"}, config)
        assert path.read_text(encoding="utf-8") == "field,value\nkind,b\n"
        await FileOutput().send({"kind": "c"}, {**config, "append": True})
        text = path.read_text(encoding="utf-8")
        assert text.endswith("kind,b\nfield,value\nkind,c\n")
