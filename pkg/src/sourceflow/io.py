"""CSV and JSON artifacts.

Floats are written with ``repr``, the shortest string that round-trips to
the same double, so files are reproducible and re-validation sees the exact
numbers that were computed.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .euler import DensityProfile

CSV_HEADER = ("r", "v", "rho", "T", "p", "U", "phase")


def fmt(x):
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_profile_csv(path, profile: DensityProfile):
    """Write ``profile``; the phase column is blank when not computed."""
    phase = profile.phase if profile.phase is not None else [None] * len(profile)
    rows = zip(profile.r, profile.v, profile.rho, profile.T, profile.p, profile.U, phase)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def read_profile_csv(path):
    """Columns of a profile CSV as a dict of arrays (phase may be None)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    cols = {}
    for j, name in enumerate(CSV_HEADER):
        vals = [row[j] for row in rows]
        if name == "phase" and all(s == "" for s in vals):
            cols[name] = None
        else:
            cols[name] = np.array([float(s) for s in vals])
    return cols


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))
