"""Deterministic CSV/JSON output.

Floats are written with 17 significant digits so values round-trip exactly.
Complex numbers are split into real and imaginary columns by the callers;
here they are serialized as ``[re, im]`` pairs in JSON only.
"""

from __future__ import annotations

import csv
import json
import math
import os
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import IoError

SCHEMA_VERSION = 1


def fmt(x):
    """Canonical text for one scalar cell."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    if x is None:
        return ""
    return str(x)


def jsonable(obj):
    """Recursively convert numpy / Fraction / complex values to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jfloat(obj.real), _jfloat(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _jfloat(obj)
    return obj


def _jfloat(x):
    # json has no nan/inf; keep them as strings so the file stays valid
    x = float(x)
    if math.isfinite(x):
        return float("%.17g" % x)
    return fmt(x)


def write_csv(path, header, rows):
    """Write ``rows`` under ``header``. An empty row list gives a header-only file."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                if len(row) != len(header):
                    raise IoError(f"row has {len(row)} cells, header has {len(header)}", "emit.write_csv")
                w.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}", "emit.write_csv") from None
    return path


def write_json(path, payload):
    path = Path(path)
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(jsonable(payload))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}", "emit.write_json") from None
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def emit(results, stem, fmt_="both"):
    """Write a table ``{"header": [...], "rows": [...], ...}`` as ``stem.csv`` and/or ``stem.json``.

    Extra keys in ``results`` go into the JSON document only. Returns the
    list of written paths.
    """
    if fmt_ not in ("csv", "json", "both"):
        raise IoError(f"unknown format {fmt_!r}", "emit.emit")
    header, rows = list(results["header"]), list(results["rows"])
    out = []
    if fmt_ in ("csv", "both"):
        out.append(write_csv(f"{stem}.csv", header, rows))
    if fmt_ in ("json", "both"):
        payload = {k: v for k, v in results.items() if k not in ("header", "rows")}
        payload["columns"] = header
        payload["rows"] = [list(r) for r in rows]
        out.append(write_json(f"{stem}.json", payload))
    return out


def relpaths(paths, root):
    return sorted(os.path.relpath(p, root) for p in paths)
