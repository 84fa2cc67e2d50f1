"""Deterministic CSV/JSON writers: fixed float formatting, config hash headers."""

from __future__ import annotations

import json
import math
from pathlib import Path


def fmt(value) -> str:
    """Canonical cell rendering: floats at 17 significant digits, ints plain."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def write_csv(path, columns: dict, header_comment: str = "") -> Path:
    """Comma-separated table with LF line endings and an optional # comment line.

    `columns` maps header name to an equal-length sequence.
    """
    path = Path(path)
    names = list(columns)
    lengths = {len(columns[name]) for name in names}
    if len(lengths) > 1:
        raise ValueError("columns must have equal length")
    rows = lengths.pop() if lengths else 0
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append(",".join(names))
    for i in range(rows):
        lines.append(",".join(fmt(columns[name][i]) for name in names))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def write_two_column(path, x, y, header_comment: str = "") -> Path:
    """Plot-ready two-column file (space separated)."""
    path = Path(path)
    lines = []
    if header_comment:
        lines.append(f"# {header_comment}")
    for a, b in zip(x, y):
        lines.append(f"{fmt(float(a))} {fmt(float(b))}")
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return str(value) if (math.isnan(value) or math.isinf(value)) else value
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n",
                    newline="\n")
    return path


def json_text(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True)
