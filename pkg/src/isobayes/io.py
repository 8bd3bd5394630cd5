"""CSV datasets and JSON results."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import DataError
from .grid import RegressionDataset

__all__ = ["load_csv", "write_csv", "to_json", "emit_json"]


def load_csv(path) -> RegressionDataset:
    """Read ``x1,...,xd,y`` rows; ``d`` is the column count minus one."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        d = len(header) - 1
        if d < 1:
            raise DataError(f"{path}: need at least one covariate column and y")
        expected = [f"x{k + 1}" for k in range(d)] + ["y"]
        for got, want in zip(header, expected):
            if got != want:
                raise DataError(f"{path}: header column {got!r} should be {want!r}")
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d + 1:
                raise DataError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field") from None
            if not all(math.isfinite(v) for v in vals):
                raise DataError(f"{path}:{lineno}: non-finite value")
            if any(v < 0.0 or v > 1.0 for v in vals[:d]):
                raise DataError(f"{path}:{lineno}: covariate outside [0,1]")
            xs.append(vals[:d])
            ys.append(vals[d])
    x = np.array(xs, dtype=float).reshape(len(xs), d)
    return RegressionDataset(x, np.array(ys, dtype=float))


def write_csv(data: RegressionDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(data.d)] + ["y"])
        for xi, yi in zip(data.x, data.y):
            w.writerow([format(float(v), ".17g") for v in xi] + [format(float(yi), ".17g")])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def to_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def emit_json(obj, path=None) -> str:
    """Serialize deterministically; write to ``path`` when given."""
    text = to_json(obj)
    if path is not None:
        Path(path).write_text(text)
    return text
