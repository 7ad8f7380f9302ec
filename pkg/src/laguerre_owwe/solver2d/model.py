"""Velocity models on a regular (x, z) grid, smoothing and synthetic generators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class VelocityModel2D:
    """Wave speed ``c[i, k]`` (m/s) at ``x = i h_x``, ``z = k h_z``; shape ``(nx, nz)``."""

    c: np.ndarray
    h_x: float
    h_z: float

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 2:
            raise ValueError("velocity grid must be two-dimensional (nx, nz)")
        if not (self.h_x > 0 and self.h_z > 0):
            raise ValueError("grid steps must be positive")
        if not np.all(c > 0):
            raise ValueError("velocity must be positive everywhere")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def nx(self) -> int:
        return self.c.shape[0]

    @property
    def nz(self) -> int:
        return self.c.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.h_x * np.arange(self.nx)

    @property
    def z(self) -> np.ndarray:
        return self.h_z * np.arange(self.nz)

    def scaled(self, factor: float) -> VelocityModel2D:
        return VelocityModel2D(self.c * factor, self.h_x, self.h_z)

    def regrid_z(self, h_z: float, nz: int | None = None) -> VelocityModel2D:
        """Linear interpolation onto a new depth step (same top and, by default, bottom)."""
        if nz is None:
            nz = int(round(self.z[-1] / h_z)) + 1
        z_new = h_z * np.arange(nz)
        c = np.array([np.interp(z_new, self.z, row) for row in self.c])
        return VelocityModel2D(c, self.h_x, h_z)


def smooth_velocity(model: VelocityModel2D, passes: int = 1) -> VelocityModel2D:
    """Five-point averaging ``(4 c + sum of the 4 neighbours) / 8``, repeated ``passes`` times.

    Out-of-range neighbours are replaced by the edge cell itself.
    """
    if passes < 0:
        raise ValueError("passes must be non-negative")
    c = np.array(model.c)
    for _ in range(passes):
        p = np.pad(c, 1, mode="edge")
        c = (4.0 * c + p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]) / 8.0
    return VelocityModel2D(c, model.h_x, model.h_z)


def constant_model(nx: int, nz: int, h_x: float, h_z: float, c: float) -> VelocityModel2D:
    return VelocityModel2D(np.full((nx, nz), float(c)), h_x, h_z)


def two_layer_model(
    nx: int, nz: int, h_x: float, h_z: float, c_top: float, c_bottom: float, depth: float
) -> VelocityModel2D:
    """Flat interface at ``depth`` (m); cells at or below it take ``c_bottom``."""
    z = h_z * np.arange(nz)
    column = np.where(z >= depth, c_bottom, c_top)
    return VelocityModel2D(np.tile(column, (nx, 1)), h_x, h_z)


def syncline_model(
    nx: int,
    nz: int,
    h_x: float,
    h_z: float,
    c_top: float = 2000.0,
    c_bottom: float = 3000.0,
    depth: float | None = None,
    sag: float | None = None,
) -> VelocityModel2D:
    """Two layers separated by a cosine-shaped trough centred laterally."""
    x = h_x * np.arange(nx)
    z = h_z * np.arange(nz)
    width = x[-1] if nx > 1 else 1.0
    depth = 0.4 * z[-1] if depth is None else depth
    sag = 0.25 * z[-1] if sag is None else sag
    # deepest (depth + sag) at the centre, depth at both edges
    interface = depth + 0.5 * sag * (1.0 + np.cos(2.0 * np.pi * (x - 0.5 * width) / width))
    c = np.where(z[None, :] >= interface[:, None], c_bottom, c_top)
    return VelocityModel2D(c, h_x, h_z)
