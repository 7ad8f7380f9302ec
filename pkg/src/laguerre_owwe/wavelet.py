"""Gaussian-windowed sine source pulse."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class SourceWavelet:
    """``f(t) = exp(-(2 pi f0 (t - t0))^2 / delta^2) sin(2 pi f0 (t - t0))``."""

    t0: float = 0.2
    delta: float = 4.0
    f0: float = 30.0

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError("f0 must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def __call__(self, t) -> np.ndarray:
        phase = 2.0 * np.pi * self.f0 * (np.asarray(t, dtype=float) - self.t0)
        return np.exp(-(phase**2) / self.delta**2) * np.sin(phase)

    def shifted(self, t0: float) -> SourceWavelet:
        return replace(self, t0=t0)

    def support(self, rel_tol: float = 1e-16) -> tuple[float, float]:
        """Interval outside which the Gaussian envelope is below ``rel_tol``."""
        half = self.delta * np.sqrt(-np.log(rel_tol)) / (2.0 * np.pi * self.f0)
        return self.t0 - half, self.t0 + half


def wavelet_eval(w: SourceWavelet, t) -> np.ndarray:
    return w(t)
