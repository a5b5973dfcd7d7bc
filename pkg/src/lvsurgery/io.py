"""Trajectory/scan CSV files, JSON reports and run manifests."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

TRAJECTORY_HEADER = ("t", "X", "Y", "Z")
SCAN_HEADER = ("A", "min_distance", "angular_coverage", "verdict")


def fmt(x: float) -> str:
    """17 significant digits: enough for an exact float round trip."""
    return format(float(x), ".17g")


def write_trajectory_csv(path, times, states) -> Path:
    path = Path(path)
    states = np.asarray(states, dtype=float).reshape(-1, 3)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRAJECTORY_HEADER) + "\n")
        for t, (x, y, z) in zip(np.asarray(times, dtype=float), states):
            fh.write(f"{fmt(t)},{fmt(x)},{fmt(y)},{fmt(z)}\n")
    return path


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(times, states)`` from a ``t,X,Y,Z`` file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRAJECTORY_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRAJECTORY_HEADER)}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        return np.empty(0), np.empty((0, 3))
    arr = np.array(rows)
    if arr.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns")
    return arr[:, 0], arr[:, 1:]


def write_scan_csv(path, result) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SCAN_HEADER) + "\n")
        for e in result.entries:
            if e.metrics is None:
                fh.write(f"{fmt(e.A)},,,{e.verdict}\n")
            else:
                fh.write(f"{fmt(e.A)},{fmt(e.metrics.min_distance)},"
                         f"{fmt(e.metrics.angular_coverage)},{e.verdict}\n")
    return path


def read_scan_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command: str, options: dict, outputs, **sections) -> dict:
    """Manifest listing the resolved options and a hash for every output.

    ``options`` must be complete enough to rerun the command on its own.
    Output paths are stored relative to the manifest's directory.
    """
    outputs = [Path(p) for p in outputs]
    return {
        "tool": "lvsurgery",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "command": command,
        "options": options,
        **sections,
        "outputs": [{"path": p.name, "sha256": sha256_file(p)} for p in outputs],
    }


def manifest_path(prefix) -> Path:
    prefix = Path(prefix)
    return prefix.with_name(prefix.name + ".manifest.json")


def load_manifest(path) -> dict:
    with open(path) as fh:
        m = json.load(fh)
    for key in ("command", "options", "outputs"):
        if key not in m:
            raise ValueError(f"{path}: manifest lacks {key!r}")
    return m
