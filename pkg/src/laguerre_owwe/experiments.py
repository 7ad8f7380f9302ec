"""Reference experiment setups shared by the command line and the test suite.

Two families are provided:

* the 1D advection benchmark (error table, convergence orders, energy profiles),
* the 2D homogeneous impulse response at desk scale.

The 2D setup keeps the dimensionless groups ``c / (eta_t h_x)`` and
``f0 h_x / c`` of a fine-grid field run while using a 10 m lateral step, so that
stability thresholds in ``h_z / h_x`` can be observed in seconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic1d import ExactSolverConfig, exact_coefficients
from .laguerre import LaguerreParams, LaguerreSeries, forward_transform
from .schemes1d import InstabilityError, Mesh1D, Solution1D, energy_profile, l2_error, solve_1d
from .solver2d import DepthExtrapolator, Extrapolation2DResult, VelocityModel2D, constant_model
from .wavelet import SourceWavelet

TABLE1_MESHES = (1000, 1500, 2000, 3000, 4000, 4500)


# -- 1D ----------------------------------------------------------------------
@dataclass(frozen=True)
class Setup1D:
    """The 1D benchmark: pulse entering ``[0, length]`` at speed ``c``."""

    eta: float = 600.0
    n_terms: int = 2500
    c: float = 3000.0
    length: float = 7500.0
    record: float = 2.0
    dt: float = 2e-4
    t_eval: float = 2.0
    wavelet: SourceWavelet = field(default_factory=SourceWavelet)

    @property
    def params(self) -> LaguerreParams:
        return LaguerreParams(self.eta, self.n_terms)

    def boundary(self) -> LaguerreSeries:
        """Laguerre coefficients of the boundary pulse."""
        t = np.arange(0.0, self.record + 0.5 * self.dt, self.dt)
        return forward_transform(t, self.wavelet(t), self.params)

    def mesh(self, n_intervals: int) -> Mesh1D:
        return Mesh1D.uniform(self.length, n_intervals)

    def exact(self, mesh: Mesh1D, boundary: LaguerreSeries | None = None) -> Solution1D:
        boundary = self.boundary() if boundary is None else boundary
        coeffs = exact_coefficients(boundary, ExactSolverConfig(self.eta, self.c), mesh.x)
        return Solution1D(mesh, self.params, coeffs, "exact")


def error_table(setup: Setup1D, schemes, meshes, on_result=None, profiles=None) -> dict:
    """Relative L2 errors ``{(scheme, n_intervals): error}`` at ``setup.t_eval``.

    A scheme that trips the instability alarm gets ``nan``. ``on_result`` is called
    as ``on_result(scheme, n_intervals, error)`` after each run. If ``profiles`` is a
    dict, it receives ``{(scheme, n_intervals): (u(x, t_eval), K(x))}`` for every
    completed run and for the exact solution under the name ``"exact"``.
    """
    boundary = setup.boundary()
    out = {}
    for n in meshes:
        mesh = setup.mesh(n)
        exact = setup.exact(mesh, boundary)
        if profiles is not None:
            profiles["exact", n] = (exact.field(setup.t_eval), energy_profile(exact))
        for name in schemes:
            try:
                sol = solve_1d(name, mesh, boundary, setup.c)
                err = l2_error(sol, exact, setup.t_eval)
                if profiles is not None:
                    profiles[name, n] = (sol.field(setup.t_eval), energy_profile(sol))
            except InstabilityError:
                err = math.nan
            out[name, n] = err
            if on_result is not None:
                on_result(name, n, err)
    return out


def convergence_order(err_coarse: float, err_fine: float, n_coarse: int, n_fine: int) -> float:
    """Empirical order ``log(e_coarse / e_fine) / log(n_fine / n_coarse)``."""
    return math.log(err_coarse / err_fine) / math.log(n_fine / n_coarse)


def relative_variation(profile) -> float:
    """``(max - min) / max`` of a non-negative profile."""
    p = np.asarray(profile, dtype=float)
    return float((p.max() - p.min()) / p.max())


# -- 2D ----------------------------------------------------------------------
@dataclass(frozen=True)
class ImpulseSetup2D:
    """Homogeneous-medium impulse response.

    The source sits at the surface centre with time signature ``wavelet``. Its
    lateral profile is a Gaussian of width ``source_sigma``, or a single-node spike
    when ``source_sigma`` is 0. The spike carries every lateral wavenumber and is
    the sharper stability probe; the Gaussian is resolved by the grid and suits
    accuracy comparisons.
    """

    c: float = 250.0
    width: float = 3500.0
    depth: float = 1500.0
    h_x: float = 10.0
    ratio: float = 0.25
    eta: float = 60.0
    n_terms: int = 400
    record: float = 6.0
    dt: float = 2e-3
    source_sigma: float = 20.0
    amplitude: float = 1.0
    wavelet: SourceWavelet = field(default_factory=lambda: SourceWavelet(t0=2.0, delta=4.0, f0=3.0))

    @property
    def h_z(self) -> float:
        return self.ratio * self.h_x

    def model(self) -> VelocityModel2D:
        nx = int(round(self.width / self.h_x)) + 1
        nz = int(round(self.depth / self.h_z)) + 1
        nz += nz % 2 == 0  # depth filtration needs an odd row count
        return constant_model(nx, nz, self.h_x, self.h_z, self.c)

    def surface_traces(self, nx: int) -> tuple[np.ndarray, np.ndarray]:
        """Sample times and the ``(nt, nx)`` surface wavefield."""
        t = np.arange(0.0, self.record + 0.5 * self.dt, self.dt)
        x = self.h_x * (np.arange(nx) - nx // 2)
        if self.source_sigma > 0:
            profile = np.exp(-(x**2) / (2.0 * self.source_sigma**2))
        else:
            profile = (x == 0).astype(float)
        return t, self.amplitude * np.outer(self.wavelet(t), profile)

    def boundary(self, nx: int) -> LaguerreSeries:
        t, traces = self.surface_traces(nx)
        return forward_transform(t, traces, LaguerreParams(self.eta, self.n_terms))


def impulse_2d(
    setup: ImpulseSetup2D, method: str = "pc", times=(), *, n_terms: int | None = None, **options
) -> Extrapolation2DResult:
    """Run the impulse response; ``options`` go to :class:`DepthExtrapolator`.

    Raises
    ------
    InstabilityError
        If the depth march trips the alarm.
    """
    model = setup.model()
    ex = DepthExtrapolator(model, setup.eta, method, **options)
    return ex.run(setup.boundary(model.nx), times, n_terms=n_terms)


def relative_l2(a, b) -> float:
    """``||a - b|| / ||b||``."""
    b = np.asarray(b, dtype=float)
    return float(np.linalg.norm(np.asarray(a) - b) / np.linalg.norm(b))
