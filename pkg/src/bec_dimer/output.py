"""Deterministic CSV/JSON writers.

Every file is assembled in memory and moved into place with os.replace, so an
aborted run leaves either the previous file or nothing.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np


def format_number(x, precision: int = 12, hex_float: bool = False) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    x = float(x)
    if hex_float:
        return x.hex()
    if x == 0:
        return "0"  # no "-0"
    if not math.isfinite(x):
        return repr(x)
    return f"{x:.{precision}g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(columns: dict, meta: dict | None = None, precision: int = 12, hex_float: bool = False) -> str:
    """Header comment with the config echo, a column header, then one row per sample."""
    buf = io.StringIO()
    if meta is not None:
        buf.write("# " + json.dumps(_jsonable(meta), sort_keys=True, separators=(",", ":")) + "\n")
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*cols):
        writer.writerow([format_number(v, precision, hex_float) for v in row])
    return buf.getvalue()


def render_json(payload: dict) -> str:
    return dumps_json(payload)


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path) -> dict:
    """Inverse of render_csv for numeric columns; returns {'meta': ..., name: array, ...}."""
    text = Path(path).read_text()
    meta = None
    if text.startswith("# "):
        head, text = text.split("\n", 1)
        meta = json.loads(head[2:])
    reader = list(csv.reader(io.StringIO(text)))
    names, rows = reader[0], [r for r in reader[1:] if r]

    def conv(s):
        if s in ("true", "false"):
            return s == "true"
        try:
            return float.fromhex(s) if "0x" in s else float(s)
        except ValueError:
            return s

    out = {"meta": meta}
    for i, n in enumerate(names):
        vals = [conv(r[i]) for r in rows]
        out[n] = np.array(vals, dtype=object if any(isinstance(v, str) for v in vals) else None)
    return out
