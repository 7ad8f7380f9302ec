"""Raw little-endian float32 grids with a plain-text ``key = value`` sidecar header.

``name.bin`` holds the samples in C order; ``name.bin.hdr`` holds at least the array
shape. Velocity models and snapshots are stored as ``(nx, nz)`` with ``h_x``, ``h_z``
and ``units``; seismograms as ``(nt, nx)`` with ``dt`` and ``h_x``.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .model import VelocityModel2D

_INT_KEYS = {"nx", "nz", "nt"}


def _header_path(path: Path) -> Path:
    return path.with_name(path.name + ".hdr")


def write_grid(path, data: np.ndarray, axes: tuple[str, str], **meta) -> Path:
    """Write a 2D array; ``axes`` names its dimensions, e.g. ``("nx", "nz")``."""
    path = Path(path)
    data = np.asarray(data)
    if data.ndim != 2:
        raise ValueError("only 2D grids are supported")
    path.parent.mkdir(parents=True, exist_ok=True)
    data.astype("<f4").tofile(path)
    header = {axes[0]: data.shape[0], axes[1]: data.shape[1], "order": ",".join(axes)}
    header.update(meta)
    lines = [f"{k} = {v}" for k, v in header.items()]
    _header_path(path).write_text("\n".join(lines) + "\n")
    return path


def read_header(path) -> dict:
    out = {}
    for line in _header_path(Path(path)).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _INT_KEYS:
            out[key] = int(value)
        else:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out


def read_grid(path) -> tuple[np.ndarray, dict]:
    """Return ``(array, header)``; the array is float64 with the header's axis order."""
    path = Path(path)
    header = read_header(path)
    axes = str(header.get("order", "nx,nz")).split(",")
    shape = tuple(int(header[a]) for a in axes)
    data = np.fromfile(path, dtype="<f4")
    if data.size != shape[0] * shape[1]:
        raise ValueError(f"{path}: {data.size} samples, header says {shape}")
    return data.reshape(shape).astype(float), header


def write_model(path, model: VelocityModel2D) -> Path:
    return write_grid(path, model.c, ("nx", "nz"), h_x=model.h_x, h_z=model.h_z, units="m/s")


def read_model(path) -> VelocityModel2D:
    c, hdr = read_grid(path)
    if hdr.get("order", "nx,nz") != "nx,nz":
        raise ValueError("velocity grid must be stored as (nx, nz)")
    return VelocityModel2D(c, float(hdr["h_x"]), float(hdr["h_z"]))


def write_seismogram(path, data: np.ndarray, dt: float, h_x: float) -> Path:
    return write_grid(path, data, ("nt", "nx"), dt=dt, h_x=h_x, units="amplitude")


def read_seismogram(path) -> tuple[np.ndarray, float, float]:
    data, hdr = read_grid(path)
    if hdr.get("order") != "nt,nx":
        raise ValueError("seismogram must be stored as (nt, nx)")
    return data, float(hdr["dt"]), float(hdr["h_x"])
