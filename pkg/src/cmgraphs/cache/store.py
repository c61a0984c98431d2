"""JSONL のディスクキャッシュ。

種類ごとに一つのファイル（anplus.jsonl, modpoly.jsonl, classpoly.jsonl）を置き、
一行に一つの CacheRecord を書きます。読み込みは同期的で、版の違うレコードは
無視します（呼び出し側が再計算して新しい版で書き直す）。

書き込みはイベントループが動いていれば start() で起動した一つのライタータスクが
aiofiles で追記し、そうでなければ put_now() がその場で追記します。
"""

import asyncio
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import aiofiles

from ..core.errors import InvalidInputError
from ..utils.logger import get_logger

logger = get_logger(__name__)

CACHE_VERSION = 1
CACHE_KINDS = ("anplus", "modpoly", "classpoly")


@dataclass(frozen=True)
class CacheRecord:
    version: int
    key: str
    payload: Any

    def to_line(self) -> str:
        body = {"version": self.version, "key": self.key, "payload": self.payload}
        return json.dumps(body, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_line(cls, line: str) -> Optional["CacheRecord"]:
        try:
            body = json.loads(line)
            return cls(int(body["version"]), str(body["key"]), body["payload"])
        except (ValueError, KeyError, TypeError):
            return None


class CacheStore:
    """種類とキーで引くキャッシュ。

    例:
        >>> store = CacheStore(Path("~/.cache/cmgraphs").expanduser())
        >>> store.put("classpoly", "-4", {"disc": -4, "coeffs": [1, -1728]})
        >>> store.get("classpoly", "-4")["coeffs"]
        [1, -1728]
    """

    def __init__(self, directory: Path, version: int = CACHE_VERSION) -> None:
        self.directory = Path(directory)
        self.version = version
        self._tables: Dict[str, Dict[str, Any]] = {}
        self._queue: Optional[asyncio.Queue[Tuple[str, str]]] = None
        self._writer: Optional[asyncio.Task] = None

    def path_for(self, kind: str) -> Path:
        if kind not in CACHE_KINDS:
            raise InvalidInputError(f"unknown cache kind: {kind}")
        return self.directory / f"{kind}.jsonl"

    def _table(self, kind: str) -> Dict[str, Any]:
        if kind in self._tables:
            return self._tables[kind]
        path = self.path_for(kind)
        table: Dict[str, Any] = {}
        stale = 0
        if path.exists():
            with path.open(encoding="utf-8") as f:
                for line in f:
                    record = CacheRecord.from_line(line)
                    if record is None or record.version != self.version:
                        stale += 1
                        continue
                    table[record.key] = record.payload
        if stale:
            logger.debug("%s: ignored %d stale or broken lines", path, stale)
        self._tables[kind] = table
        return table

    def get(self, kind: str, key: str) -> Optional[Any]:
        return self._table(kind).get(key)

    def put(self, kind: str, key: str, payload: Any) -> None:
        """記録し、ライターが動いていればキューに、なければその場で追記する。"""
        self._table(kind)[key] = payload
        line = CacheRecord(self.version, key, payload).to_line()
        if self._queue is not None:
            self._queue.put_nowait((kind, line))
        else:
            self._append(kind, line)

    def put_now(self, kind: str, key: str, payload: Any) -> None:
        self._table(kind)[key] = payload
        self._append(kind, CacheRecord(self.version, key, payload).to_line())

    def _append(self, kind: str, line: str) -> None:
        path = self.path_for(kind)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as f:
            f.write(line)

    async def start(self) -> None:
        """書き込みタスクを起動する。"""
        if self._writer is not None:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        self._queue = asyncio.Queue()
        self._writer = asyncio.create_task(self._drain(self._queue))

    async def close(self) -> None:
        """キューを書き切ってタスクを止める。"""
        if self._queue is None or self._writer is None:
            return
        await self._queue.join()
        self._writer.cancel()
        try:
            await self._writer
        except asyncio.CancelledError:
            pass
        self._queue = None
        self._writer = None

    async def _drain(self, queue: "asyncio.Queue[Tuple[str, str]]") -> None:
        while True:
            kind, line = await queue.get()
            try:
                async with aiofiles.open(
                    str(self.path_for(kind)), mode="a", encoding="utf-8"
                ) as f:  # type: ignore
                    await f.write(line)
            except OSError as exc:
                logger.warning("cache write failed for %s: %s", kind, exc)
            finally:
                queue.task_done()
