"""Post-stack depth migration of a zero-offset section under the exploding-reflector model.

Reflectors act as sources firing at ``t = 0`` in a medium of half the true velocity.
The time-reversed section is injected at the surface, continued downward, and the
field at the record end is the depth image.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

from ..laguerre import LaguerreParams, forward_transform
from ..wavelet import SourceWavelet
from .extrapolate import DepthExtrapolator, Extrapolation2DResult
from .model import VelocityModel2D, smooth_velocity


@dataclass
class MigrationResult:
    image: np.ndarray  # (nx, nz)
    record_length: float
    model: VelocityModel2D  # velocities actually used (halved and smoothed)
    run: Extrapolation2DResult


def migrate(
    section,
    dt: float,
    model: VelocityModel2D,
    eta: float,
    n_terms: int,
    *,
    method: str = "pc",
    smoothing_passes: int = 1,
    **extrapolator_options,
) -> MigrationResult:
    """Migrate a zero-offset section.

    Parameters
    ----------
    section : array_like, shape (nt, nx)
        Zero-offset traces, one per surface grid column, sampled every ``dt``.
    dt : float
        Time step (s).
    model : VelocityModel2D
        True interval velocities; they are halved and smoothed internally.
    eta, n_terms : float, int
        Laguerre parameters; the series must resolve a signal over the whole record.
    method : {"pc", "am"}
    smoothing_passes : int
        Number of five-point smoothing passes applied to the halved model.
    **extrapolator_options
        Passed to :class:`DepthExtrapolator`.

    Raises
    ------
    InstabilityError
        If the depth march blows up (typically a rough model with too little smoothing).
    """
    s = np.asarray(section, dtype=float)
    if s.ndim != 2 or s.shape[1] != model.nx:
        raise ValueError(f"section must have shape (nt, {model.nx})")
    if s.shape[0] < 2 or not dt > 0:
        raise ValueError("need at least two time samples and dt > 0")
    times = dt * np.arange(s.shape[0])
    record = float(times[-1])
    series = forward_transform(times, s[::-1], LaguerreParams(eta, n_terms))
    mig_model = smooth_velocity(model.scaled(0.5), smoothing_passes)
    ex = DepthExtrapolator(mig_model, eta, method, **extrapolator_options)
    run = ex.run(series, [record])
    return MigrationResult(run.snapshots[0], record, mig_model, run)


def flat_reflector_section(
    nx: int, nt: int, dt: float, depth: float, velocity: float, wavelet: SourceWavelet
) -> np.ndarray:
    """Zero-offset section of one horizontal reflector in a constant-velocity medium.

    Every trace is ``wavelet`` centred on the two-way time ``2 depth / velocity``;
    geometric spreading is ignored. Shape ``(nt, nx)``.
    """
    t_reflect = 2.0 * depth / velocity
    trace = wavelet.shifted(t_reflect)(dt * np.arange(nt))
    return np.repeat(trace[:, None], nx, axis=1)


def envelope_peak_depth(column, h_z: float) -> float:
    """Depth of the largest envelope value of an image column (parabolic sub-cell refinement)."""
    env = np.abs(hilbert(np.asarray(column, dtype=float)))
    k = int(np.argmax(env))
    if 0 < k < env.size - 1:
        y0, y1, y2 = env[k - 1], env[k], env[k + 1]
        curv = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / curv if curv != 0 else 0.0
        return (k + shift) * h_z
    return k * h_z
