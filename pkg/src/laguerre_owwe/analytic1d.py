"""Exact Laguerre coefficients of the 1D advection problem.

Transforming in ``x`` as well (parameter ``kappa = eta / c``) collapses the problem to
``V^m_0 = (f^m - f^{m-1}) / sqrt(kappa)`` and ``V^m_j = V^{m-1}_{j-1}``, so

    v^m(x) = sum_{j=0}^{m} V^{m-j}_0 l_j(kappa x),

a discrete linear convolution evaluated for all ``m`` at once by FFT.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .laguerre import LaguerreSeries, inverse_transform, laguerre_functions
from .numkernels import fft_convolve


@dataclass(frozen=True)
class ExactSolverConfig:
    eta: float
    c: float
    kappa: float | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("wave speed must be positive")
        if self.kappa is None:
            object.__setattr__(self, "kappa", self.eta / self.c)
        if abs(self.kappa - self.eta / self.c) > 1e-12 * (self.eta / self.c):
            raise ValueError(
                "the convolution form requires kappa = eta / c "
                f"(got kappa={self.kappa}, eta/c={self.eta / self.c})"
            )


def boundary_moments(fbar: LaguerreSeries, cfg: ExactSolverConfig) -> np.ndarray:
    """``V^m_0`` for all ``m``."""
    f = fbar.coeffs
    return np.diff(f, prepend=0.0) / np.sqrt(cfg.kappa)


def exact_coefficients(fbar: LaguerreSeries, cfg: ExactSolverConfig, x, block: int = 256) -> np.ndarray:
    """Exact ``v^m(x)``, shape ``(n_terms,) + shape(x)``.

    Locations are processed in blocks of ``block`` to bound FFT workspace.
    """
    if abs(fbar.params.eta - cfg.eta) > 1e-12 * cfg.eta:
        raise ValueError("series and config use different eta")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise ValueError("x must be non-negative")
    M = fbar.params.n_terms
    V0 = boundary_moments(fbar, cfg)
    flat = xs.ravel()
    out = np.empty((M, flat.size))
    for start in range(0, flat.size, block):
        sl = slice(start, start + block)
        basis = laguerre_functions(cfg.kappa, flat[sl], M - 1)
        out[:, sl] = fft_convolve(V0, basis)[:M]
    return out.reshape((M,) + xs.shape)


def exact_field(fbar: LaguerreSeries, cfg: ExactSolverConfig, xs, t) -> np.ndarray:
    """Time-domain solution ``u(x, t)`` at the given locations."""
    coeffs = exact_coefficients(fbar, cfg, xs)
    series = LaguerreSeries(fbar.params, coeffs)
    return inverse_transform(series, t)
