"""CSV snapshots and JSON reports.

Snapshot CSVs have the header ``x[,y],value[,value_y]`` and one row per node
in (y, x) lexicographic order. Numbers are printed with 17 significant
digits so that every double survives a write/read round trip unchanged.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .errors import OutputError
from .grid import GridSpec


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _header(grid: GridSpec, vector: bool) -> list[str]:
    cols = ["x", "y"][: grid.dim] + ["value"]
    if vector and grid.dim == 2:
        cols.append("value_y")
    return cols


def write_snapshot(field: np.ndarray, grid: GridSpec, path: str | os.PathLike) -> None:
    """Write a scalar field ``grid.shape`` or vector field ``(dim, *grid.shape)``."""
    field = np.asarray(field, dtype=float)
    vector = field.shape == (grid.dim, *grid.shape) and field.shape != grid.shape
    if not vector and field.shape != grid.shape:
        raise ValueError(f"field shape {field.shape} does not match grid shape {grid.shape}")
    coords = [c.ravel() for c in grid.mesh()]
    comps = [c.ravel() for c in field] if vector else [field.ravel()]
    lines = [",".join(_header(grid, vector))]
    for row in zip(*coords, *comps):
        lines.append(",".join(fmt(v) for v in row))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def read_snapshot(path: str | os.PathLike, grid: GridSpec) -> np.ndarray:
    """Read a CSV written by ``write_snapshot`` back onto ``grid``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    header, body = rows[0], rows[1:]
    nc = grid.dim
    if header[:nc] != ["x", "y"][:nc] or len(body) != grid.size:
        raise OutputError(f"{path} does not describe a field on a grid of shape {grid.shape}")
    data = np.array([[float(v) for v in r] for r in body])
    coords = np.stack([c.ravel() for c in grid.mesh()], axis=1)
    if not np.allclose(data[:, :nc], coords, rtol=0, atol=1e-9 * grid.h):
        raise OutputError(f"node coordinates in {path} do not match the grid")
    values = data[:, nc:]
    if values.shape[1] == 1:
        return values[:, 0].reshape(grid.shape)
    return values.T.reshape(values.shape[1], *grid.shape)


def write_series(path: str | os.PathLike, columns: dict[str, list | np.ndarray]) -> None:
    names = list(columns)
    data = [list(columns[n]) for n in names]
    lines = [",".join(names)] + [",".join(fmt(v) for v in row) for row in zip(*data)]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: str | os.PathLike, payload: dict) -> None:
    try:
        Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def snapshot_name(prefix: str, t: float) -> str:
    return f"{prefix}_t{t:.4f}.csv"
