"""Report, diagnostics and raw-frame output."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from hnls.integrator import Trajectory
from hnls.norms import DiagnosticsRecord
from hnls.spectral import Grid

_HEADER = np.dtype([("n", "<i8"), ("L", "<f8"), ("count", "<i8")])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; keep them readable
        return v if math.isfinite(v) else str(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1)


def write_json(obj, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


def write_diagnostics(records: list[DiagnosticsRecord], path: str | Path, fmt: str = "csv") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        rows = [dict(zip(r.csv_header(), r.csv_row())) for r in records]
        rows = [{k: (float(v) if v != "" else None) for k, v in row.items()} for row in rows]
        return write_json(rows, path)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if records:
            writer.writerow(records[0].csv_header())
        for r in records:
            writer.writerow(r.csv_row())
    return path


def write_frames(traj: Trajectory, path: str | Path) -> Path:
    """Little-endian dump: header (n, L, count), float64 times, complex64 frames."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = traj.grid
    header = np.array([(grid.n, grid.length, len(traj))], dtype=_HEADER)
    with path.open("wb") as fh:
        fh.write(header.tobytes())
        fh.write(np.asarray(traj.times, dtype="<f8").tobytes())
        fh.write(traj.values().astype("<c8").tobytes())
    return path


def read_frames(path: str | Path) -> tuple[Grid, np.ndarray, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.itemsize:
        raise ValueError(f"{path}: truncated header")
    head = np.frombuffer(raw, dtype=_HEADER, count=1)[0]
    n, length, count = int(head["n"]), float(head["L"]), int(head["count"])
    offset = _HEADER.itemsize
    expected = offset + 8 * count + 8 * n * count
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    times = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    frames = np.frombuffer(raw, dtype="<c8", count=n * count, offset=offset + 8 * count)
    return Grid(n, length), times.copy(), frames.reshape(count, n).astype(complex)
