"""Result persistence: CSV series, JSON reports and the binary snapshot container.

Snapshot layout (little-endian float64 throughout):

    header   magic, version, n, N, half_width, count      (6 values)
    record   t, then n*N complex samples as (re, im) pairs

``magic`` is the float whose bytes spell b"DLSNAP01".
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .spectral import Grid, SpectralField

MAGIC_BYTES = b"DLSNAP01"
MAGIC = float(np.frombuffer(MAGIC_BYTES, dtype="<f8")[0])
VERSION = 1.0


def atomic_write(path, data):
    """Write bytes or text to ``path`` via a temp file in the same directory and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, columns, rows):
    atomic_write(path, csv_text(columns, rows))


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, payload):
    atomic_write(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def trajectory_rows(traj):
    return [d.to_dict() for d in traj.diagnostics]


TRAJECTORY_COLUMNS = ["t", "H0", "H1", "H2", "H3", "H4", "E", "phi_sup"]


def write_trajectory_csv(path, traj):
    write_csv(path, TRAJECTORY_COLUMNS, trajectory_rows(traj))


def snapshots_bytes(times, fields) -> bytes:
    if not fields:
        raise ValueError("no snapshots")
    grid = fields[0].grid
    n = fields[0].n
    header = np.array([MAGIC, VERSION, n, grid.points, grid.half_width, len(fields)], dtype="<f8")
    parts = [header.tobytes()]
    for t, f in zip(times, fields):
        if f.grid != grid or f.n != n:
            raise ValueError("all snapshots must share grid and component count")
        rec = np.empty(1 + 2 * n * grid.points, dtype="<f8")
        rec[0] = t
        rec[1:] = np.ascontiguousarray(f.values).view(np.float64).ravel()
        parts.append(rec.tobytes())
    return b"".join(parts)


def write_snapshots(path, traj):
    atomic_write(path, snapshots_bytes(traj.times, traj.fields))


def read_snapshots(path):
    """Returns (times, fields)."""
    raw = Path(path).read_bytes()
    if len(raw) < 48 or raw[:8] != MAGIC_BYTES:
        raise ValueError("not a snapshot file")
    header = np.frombuffer(raw[:48], dtype="<f8")
    version, n, N, hw, count = header[1], int(header[2]), int(header[3]), float(header[4]), int(header[5])
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    grid = Grid(hw, N)
    rec_len = 1 + 2 * n * N
    body = np.frombuffer(raw[48:], dtype="<f8")
    if body.size != rec_len * count:
        raise ValueError("truncated snapshot file")
    body = body.reshape(count, rec_len)
    times = [float(t) for t in body[:, 0]]
    fields = [SpectralField(grid, body[i, 1:].copy().view(np.complex128).reshape(n, N)) for i in range(count)]
    return times, fields
