"""Locale-free, byte-stable text output: 17 significant digits, LF line endings."""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Sequence


def fmt_real(x: float) -> str:
    """17 significant digits; non-finite values become ``inf``, ``-inf`` or ``nan``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0" if math.copysign(1.0, x) > 0 else "-0"
    return format(x, ".17g")


def fmt_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_real(v)
    return str(v)


def _csv_escape(s: str) -> str:
    if any(ch in s for ch in ',"\n\r'):
        return '"' + s.replace('"', '""') + '"'
    return s


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_escape(fmt_cell(v)) for v in row))
    return "\n".join(lines) + "\n"


def _encode(v: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        # JSON has no inf/nan literals; strings keep the output parseable
        return fmt_real(v) if math.isfinite(v) else json.dumps(fmt_real(v))
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=True)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        items = [pad + _encode(x, indent, level + 1) for x in v]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(v).__name__}")


def to_json(obj: Any, indent: int = 2) -> str:
    """JSON text with reals at 17 significant digits and a trailing newline."""
    return _encode(obj, indent, 0) + "\n"

