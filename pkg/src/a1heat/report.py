"""Deterministic JSON / CSV serialisation of reports.

Floats are written with 17 significant digits so that parse-and-rewrite is
byte-identical; object keys are sorted.
"""

import csv
import dataclasses
import enum
from fractions import Fraction
import io
import json
import math
import sys

import numpy as np

from .errors import A1HeatError

CSV_HEADER = ("r", "s", "t", "h", "E", "ratio", "region")


class ReportError(A1HeatError, OSError):
    """Writing a report failed."""


def to_plain(obj):
    """Convert reports and their parts to JSON-compatible builtins."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        for f in dataclasses.fields(obj):
            if f.name == "rows":
                continue
            out[f.name] = to_plain(getattr(obj, f.name))
        return out
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(to_plain(k)): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [to_plain(v) for v in obj]
        return sorted(items, key=str) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    return obj


def _fmt_float(x):
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, ".17g")
    if not any(ch in text for ch in ".eE"):
        text += ".0"
    return text


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{pad}{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(parts) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        parts = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent=2):
    return _encode(to_plain(obj), indent, 0) + "\n"


def loads(text):
    return json.loads(text)


def csv_rows(report):
    """Rows ``r,s,t,h,E,ratio,region`` from a ratio report kept with ``keep_rows``."""
    for r, s, t, lh, le, lr, region in report.rows:
        yield (r, s, t, math.exp(lh), math.exp(le), math.exp(lr), region)


def dumps_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in csv_rows(report):
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def report_write(report, path, fmt="json"):
    """Write ``report`` to ``path`` (``'-'`` for stdout) as JSON or CSV."""
    if fmt == "json":
        text = dumps(report)
    elif fmt == "csv":
        if not hasattr(report, "rows"):
            raise ReportError(f"{type(report).__name__} has no tabular rows; use json")
        text = dumps_csv(report)
    else:
        raise ReportError(f"unknown format {fmt!r}")
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc
