"""Deterministic CSV/JSON writers and the wavepacket checkpoint format.

Checkpoint layout (all little-endian):

    bytes 0..7    ASCII magic  b"DIATOMWP"
    bytes 8..15   uint64       length L of the JSON header
    next L bytes  UTF-8 JSON   {"mode", "shape", "time", "basis"?, "grid"?, "dtype": "<c16"}
    remainder     complex128   coefficients in C order, each value as (real, imag) float64
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .rovib import LineGrid, RadialGrid, RotorBasis, Wavepacket

MAGIC = b"DIATOMWP"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            return "0"
        return format(v, ".17g")
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(config) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(path, psi: Wavepacket) -> None:
    header = {"mode": psi.mode, "shape": list(psi.coefficients.shape), "time": psi.time, "dtype": "<c16"}
    if psi.basis is not None:
        header["basis"] = {"j_max": psi.basis.j_max, "m": psi.basis.m}
    if isinstance(psi.grid, RadialGrid):
        header["grid"] = {"kind": "radial", "R_min": psi.grid.R_min, "R_max": psi.grid.R_max, "N": psi.grid.N}
    elif isinstance(psi.grid, LineGrid):
        header["grid"] = {"kind": "line", "X_min": psi.grid.X_min, "X_max": psi.grid.X_max, "N": psi.grid.N}
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    data = np.ascontiguousarray(psi.coefficients, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(data)


def load_checkpoint(path) -> Wavepacket:
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ConfigError(f"{path} is not a wavepacket checkpoint")
        (n,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(n).decode("utf-8"))
        raw = fh.read()
    coeffs = np.frombuffer(raw, dtype="<c16").reshape(header["shape"]).astype(complex)
    basis = RotorBasis(**header["basis"]) if "basis" in header else None
    grid = None
    if "grid" in header:
        g = dict(header["grid"])
        kind = g.pop("kind")
        grid = RadialGrid(**g) if kind == "radial" else LineGrid(**g)
    return Wavepacket(header["mode"], coeffs, header["time"], basis, grid)


def ensure_parent(prefix) -> Path:
    p = Path(prefix)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return p
