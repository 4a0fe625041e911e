"""Deterministic report rendering.

JSON and CSV writers with floats printed at 17 significant digits so every
value round-trips to the identical 64-bit float and identical inputs produce
byte-identical output.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["format_float", "to_json", "to_csv"]


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"reports must contain finite numbers, got {x!r}")
    return f"{x:.17g}"


def _normalize(value):
    if isinstance(value, np.ndarray):
        return [_normalize(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _write_json(value, out: list, indent: int, level: int):
    value = _normalize(value)
    pad = " " * (indent * level)
    pad_inner = " " * (indent * (level + 1))
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(pad_inner)
            _write_json(item, out, indent, level + 1)
            out.append(",\n" if i + 1 < len(value) else "\n")
        out.append(pad + "]")
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        items = list(value.items())
        for i, (key, item) in enumerate(items):
            out.append(pad_inner + json.dumps(str(key)) + ": ")
            _write_json(item, out, indent, level + 1)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def to_json(value, indent: int = 2) -> str:
    """Render a report structure as deterministic JSON text."""
    out: list[str] = []
    _write_json(value, out, indent, 0)
    out.append("\n")
    return "".join(out)


def _cell(value) -> str:
    value = _normalize(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, int):
        return str(value)
    text = str(value)
    if any(c in text for c in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def to_csv(header, rows) -> str:
    """Render rows (sequences aligned with ``header``) as CSV text."""
    lines = [",".join(_cell(h) for h in header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"
