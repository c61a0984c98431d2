"""報告を JSON / CSV の文字列にする。

同じ報告からは常に同じ文字列ができます（キーは整列、浮動小数は format_real）。
CSV は表になる一覧（records / rows / matches）があればそれを行にし、
なければ "field,value" の二列にします。先頭の "#" 行は provenance です。
"""

import csv
import io
import json
from typing import Any, Dict, Iterator, List, Tuple

import mpmath

from ..core.errors import InvalidInputError
from ..numerics.precision import PrecComplex, format_real

TABLE_KEYS = ("records", "rows", "matches")


def _default(value: Any) -> Any:
    if isinstance(value, PrecComplex):
        return {
            "re": format_real(value.re, value.err),
            "im": format_real(value.im, value.err),
            "err": format_real(value.err),
        }
    if isinstance(value, mpmath.mpf):
        return format_real(value)
    if isinstance(value, mpmath.mpc):
        return {"re": format_real(value.real), "im": format_real(value.imag)}
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    # Fraction や有理点は文字列で
    return str(value)


def render_json(data: Dict[str, Any]) -> str:
    text = json.dumps(
        data, sort_keys=True, indent=2, ensure_ascii=False, default=_default
    )
    return text + "\n"


def _cell(value: Any) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return json.dumps(value, sort_keys=True, ensure_ascii=False, default=_default)


def _flatten(data: Dict[str, Any], prefix: str = "") -> Iterator[Tuple[str, Any]]:
    for key in sorted(data):
        value = data[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, name + ".")
        else:
            yield name, value


def _table(data: Dict[str, Any]) -> Tuple[str, List[Dict[str, Any]]]:
    for key in TABLE_KEYS:
        rows = data.get(key)
        if isinstance(rows, list) and rows and all(isinstance(r, dict) for r in rows):
            return key, rows
    return "", []


def render_csv(data: Dict[str, Any]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    provenance = data.get("provenance", {})
    for key, value in _flatten(provenance, "provenance."):
        buffer.write(f"# {key}={_cell(value)}\n")
    _, rows = _table(data)
    if rows:
        columns = sorted({c for row in rows for c in row})
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
        return buffer.getvalue()
    writer.writerow(["field", "value"])
    body = {k: v for k, v in data.items() if k != "provenance"}
    for key, value in _flatten(body):
        writer.writerow([key, _cell(value)])
    return buffer.getvalue()


def render_report(data: Dict[str, Any], output_format: str = "json") -> str:
    """報告を output_format（"json" か "csv"）の文字列にする。"""
    fmt = output_format.lower()
    if fmt == "json":
        return render_json(data)
    if fmt == "csv":
        return render_csv(data)
    raise InvalidInputError(f"unknown output format: {output_format}")
