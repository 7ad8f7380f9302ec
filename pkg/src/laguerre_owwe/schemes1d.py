"""Laguerre-domain solvers for the 1D advection problem ``v_t + c v_x = 0``.

With ``v(0, t) = f(t)`` and zero initial data, coefficient ``m`` of the Laguerre
expansion in time satisfies ``(eta/2 + c d/dx) v^m + Phi_1(v^m) = 0`` where ``Phi_1``
sums all lower coefficients. Each coefficient is marched in ``x`` from the boundary
value ``f^m``; the coefficients themselves are produced in increasing ``m``.

Schemes:

* ``Forward1``, ``Backward1`` - first-order one-sided differences.
* ``CN`` - Crank-Nicolson.
* ``RK4`` - classical Runge-Kutta in ``x`` with half-node ``Phi_1`` from quintic splines.
* ``AM5-I5``, ``AM6-I7`` - Adams-Moulton with odd-node spline filtration of ``Phi_1``.
* ``AM5-D4`` - Adams-Moulton with ``Phi_1`` rebuilt from the previous coefficient by a
  fourth-order central difference (deliberately inconsistent, adds damping).
* ``Richardson`` - CN on steps ``h`` and ``h/2`` combined as ``(4 fine - coarse) / 3``.
* ``AM5``, ``AM6`` - unstabilized Adams-Moulton (for demonstrating blow-up).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.signal import lfilter, lfiltic

from .laguerre import LaguerreParams, LaguerreSeries, PhiAccumulator, laguerre_functions
from .splines import midpoint_values, refine, spline_filter
from .wavelet import SourceWavelet, wavelet_eval  # noqa: F401  (re-exported)

AM5_WEIGHTS = tuple(Fraction(a, 720) for a in (-19, 106, -264, 646, 251))
AM6_WEIGHTS = tuple(Fraction(a, 1440) for a in (27, -173, 482, -798, 1427, 475))
AB5_WEIGHTS = tuple(Fraction(a, 720) for a in (251, -1274, 2616, -2774, 1901))
AM3_WEIGHTS = tuple(Fraction(a, 12) for a in (-1, 8, 5))
AM4_WEIGHTS = tuple(Fraction(a, 24) for a in (1, -5, 19, 9))

# first-derivative stencils on offsets -2..2 and -3..3
D4_STENCIL = tuple(Fraction(a, 12) for a in (1, -8, 0, 8, -1))
D6_STENCIL = tuple(Fraction(a, 60) for a in (-1, 9, -45, 0, 45, -9, 1))


class InstabilityError(RuntimeError):
    """A coefficient grew past the alarm threshold; ``m`` is the offending index."""

    def __init__(self, m: int, amplitude: float, threshold: float, where: str = ""):
        self.m = m
        self.amplitude = amplitude
        self.threshold = threshold
        super().__init__(
            f"instability at coefficient m={m}{where}: "
            f"|v| = {amplitude:.3e} exceeds {threshold:.3e}"
        )


@dataclass(frozen=True)
class SchemeSpec:
    """Which scheme to run and how it is stabilized.

    ``weights`` are Adams coefficients, oldest first, for offsets ``-(q-1) .. 1``
    (Adams-Moulton) or ``-(q-1) .. 0`` (Adams-Bashforth, analysis only);
    ``filter_degree`` enables odd-node spline filtration of ``Phi_1``;
    ``phi_stencil`` replaces ``Phi_1`` by the inconsistent central-difference form.
    """

    name: str
    method: str
    weights: tuple = ()
    filter_degree: int | None = None
    phi_stencil: tuple | None = None

    METHODS = ("forward1", "backward1", "cn", "rk4", "adams_moulton", "adams_bashforth", "richardson_cn")

    def __post_init__(self):
        if self.method not in self.METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method in ("adams_moulton", "adams_bashforth"):
            if sum(self.weights) != 1:
                raise ValueError("Adams weights must sum to one")
            if self.filter_degree is not None and self.phi_stencil is not None:
                raise ValueError("choose one stabilizer")

    @property
    def steps_back(self) -> int:
        """Number of known nodes the scheme needs before its first regular step."""
        if self.method == "adams_moulton":
            return len(self.weights) - 1
        if self.method == "adams_bashforth":
            return len(self.weights)
        return 1

    @property
    def stabilizer(self) -> str:
        if self.filter_degree is not None:
            return f"spline_filter({self.filter_degree})"
        if self.phi_stencil is not None:
            return "inconsistent_d4" if len(self.phi_stencil) == 5 else "inconsistent"
        return "none"

    @classmethod
    def preset(cls, name: str) -> SchemeSpec:
        try:
            return PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown scheme {name!r}; choose from {sorted(PRESETS)}") from None


PRESETS = {
    s.name: s
    for s in (
        SchemeSpec("Forward1", "forward1"),
        SchemeSpec("Backward1", "backward1"),
        SchemeSpec("CN", "cn"),
        SchemeSpec("RK4", "rk4"),
        SchemeSpec("Richardson", "richardson_cn"),
        SchemeSpec("AM5-I5", "adams_moulton", AM5_WEIGHTS, filter_degree=5),
        SchemeSpec("AM6-I7", "adams_moulton", AM6_WEIGHTS, filter_degree=7),
        SchemeSpec("AM5-D4", "adams_moulton", AM5_WEIGHTS, phi_stencil=D4_STENCIL),
        SchemeSpec("AM5-D6", "adams_moulton", AM5_WEIGHTS, phi_stencil=D6_STENCIL),
        SchemeSpec("AM5-I3", "adams_moulton", AM5_WEIGHTS, filter_degree=3),
        SchemeSpec("AM5", "adams_moulton", AM5_WEIGHTS),
        SchemeSpec("AM6", "adams_moulton", AM6_WEIGHTS),
        SchemeSpec("AM3", "adams_moulton", AM3_WEIGHTS),
        SchemeSpec("AM4", "adams_moulton", AM4_WEIGHTS),
        SchemeSpec("AB5", "adams_bashforth", AB5_WEIGHTS),
    )
}
TABLE1_SCHEMES = ("AM5-I5", "AM6-I7", "CN", "RK4", "Richardson", "AM5-D4")


@dataclass(frozen=True)
class Mesh1D:
    h_x: float
    n_nodes: int
    x0: float = 0.0

    def __post_init__(self):
        if not self.h_x > 0:
            raise ValueError("h_x must be positive")
        if self.n_nodes < 2:
            raise ValueError("need at least two nodes")

    @classmethod
    def uniform(cls, length: float, n_intervals: int) -> Mesh1D:
        return cls(length / n_intervals, n_intervals + 1)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h_x * np.arange(self.n_nodes)


@dataclass
class Solution1D:
    mesh: Mesh1D
    params: LaguerreParams
    coeffs: np.ndarray  # (n_terms, n_nodes)
    scheme: str = ""
    phi1: np.ndarray | None = field(default=None, repr=False)

    def field(self, t: float) -> np.ndarray:
        """Time-domain wavefield ``u(x_j, t)`` on the mesh nodes."""
        basis = laguerre_functions(self.params.eta, t, self.params.n_terms - 1)
        return basis @ self.coeffs


# ---------------------------------------------------------------------------
# x-marches. Each takes the boundary value and the Phi_1 grid for the current m.


def _first_order(a_next: float, a_cur: float, forcing: np.ndarray, v0: float) -> np.ndarray:
    """Solve ``a_next v[j+1] + a_cur v[j] = forcing[j]`` from ``v[0] = v0``."""
    v = np.empty(forcing.size + 1)
    v[0] = v0
    # lfiltic does not normalize by a[0], so normalize before both calls
    a = np.array([1.0, a_cur / a_next])
    zi = lfiltic([1.0], a, [v0])
    v[1:], _ = lfilter([1.0], a, forcing / a_next, zi=zi)
    return v


def _rk4_coefficients(z: float) -> tuple[float, float, float, float]:
    """Coefficients of ``y, g0, g_half, g1`` in one RK4 step of ``y' = lam y + g`` (z = lam h).

    Returned values multiply ``y`` directly and ``h * g`` for the forcing terms.
    """
    # each stage as a vector over (y, h g0, h g_half, h g1); k's are scaled by h
    y = np.array([1.0, 0.0, 0.0, 0.0])
    g0, gh, g1 = np.eye(4)[1], np.eye(4)[2], np.eye(4)[3]
    k1 = z * y + g0
    k2 = z * (y + 0.5 * k1) + gh
    k3 = z * (y + 0.5 * k2) + gh
    k4 = z * (y + k3) + g1
    out = y + (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return tuple(out)


class _Marcher:
    """Per-coefficient stepper holding the ``Phi_1`` accumulators of its own mesh."""

    def __init__(self, spec: SchemeSpec, h: float, n_nodes: int, c: float, eta: float):
        self.spec = spec
        self.h = h
        self.n = n_nodes
        self.c = c
        self.eta = eta
        self.acc = PhiAccumulator.start(eta, 0.0, (n_nodes,))

    def phi(self) -> np.ndarray:
        return self.acc.phi1

    def march(self, f_m: float, phi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def step(self, f_m: float) -> np.ndarray:
        row = self.march(f_m, self.phi())
        self.acc.update(row)
        return row


class _ForwardMarcher(_Marcher):
    def march(self, f_m, phi):
        k = self.c / self.h
        return _first_order(k, -(k - 0.5 * self.eta), -phi[:-1], f_m)


class _BackwardMarcher(_Marcher):
    def march(self, f_m, phi):
        k = self.c / self.h
        return _first_order(k + 0.5 * self.eta, -k, -phi[1:], f_m)


class _CNMarcher(_Marcher):
    def march(self, f_m, phi):
        k = self.c / self.h
        q = 0.25 * self.eta
        return _first_order(k + q, -(k - q), -0.5 * (phi[:-1] + phi[1:]), f_m)


class _RK4Marcher(_Marcher):
    def march(self, f_m, phi):
        lam = -0.5 * self.eta / self.c
        r, a0, ah, a1 = _rk4_coefficients(lam * self.h)
        g = -phi / self.c
        g_half = -midpoint_values(phi, 5) / self.c
        forcing = self.h * (a0 * g[:-1] + ah * g_half + a1 * g[1:])
        return _first_order(1.0, -r, forcing, f_m)


class _RichardsonMarcher(_Marcher):
    """CN on the mesh and on its halving; ``Phi_1`` reaches the fine nodes by cubic splines."""

    def march(self, f_m, phi):
        coarse = _CNMarcher.march(self, f_m, phi)
        fine_phi = refine(phi, 2, degree=3)
        k = 2.0 * self.c / self.h
        q = 0.25 * self.eta
        fine = _first_order(k + q, -(k - q), -0.5 * (fine_phi[:-1] + fine_phi[1:]), f_m)
        return (4.0 * fine[::2] - coarse) / 3.0


class _AdamsMarcher(_Marcher):
    """Implicit Adams-Moulton march; the first ``q`` nodes come from a fine-step starter."""

    def __init__(self, spec, h, n_nodes, c, eta, starter: str = "richardson", refine_by: int = 8):
        super().__init__(spec, h, n_nodes, c, eta)
        self.w = np.array([float(a) for a in spec.weights])
        self.q = len(self.w) - 1
        if n_nodes < self.q + 2:
            raise ValueError(f"need at least {self.q + 2} nodes for this scheme")
        if spec.filter_degree is not None and n_nodes % 2 == 0:
            raise ValueError("spline filtration needs an odd number of nodes")
        self.prev = np.zeros(n_nodes)
        self.refine_by = refine_by
        strip_spec = SchemeSpec.preset({"richardson": "Richardson", "cn": "CN"}[starter])
        self.starter = make_marcher(strip_spec, h / refine_by, self.q * refine_by + 1, c, eta)

    def phi(self):
        spec = self.spec
        if spec.filter_degree is not None:
            # filtered values replace the accumulator itself
            self.acc.phi1 = spline_filter(self.acc.phi1, spec.filter_degree)
            return self.acc.phi1
        if spec.phi_stencil is not None:
            return self._inconsistent_phi()
        return self.acc.phi1

    def _inconsistent_phi(self) -> np.ndarray:
        # Phi_1(v^m) = eta/2 v^{m-1} - c d/dx v^{m-1}, central stencil where it fits
        stencil = np.array([float(a) for a in self.spec.phi_stencil])
        r = len(stencil) // 2
        phi = self.acc.phi1.copy()
        v = self.prev
        n = self.n
        d = sum(stencil[k] * v[k: n - 2 * r + k] for k in range(len(stencil))) / self.h
        phi[r: n - r] = 0.5 * self.eta * v[r: n - r] - self.c * d
        return phi

    def march(self, f_m, phi):
        q, w, n = self.q, self.w, self.n
        v = np.empty(n)
        strip = self.starter.step(f_m)
        v[: q + 1] = strip[:: self.refine_by][: q + 1]
        v[0] = f_m
        k = self.c / self.h
        half = 0.5 * self.eta
        a = np.concatenate([[k + half * w[-1], -k + half * w[-2]], half * w[-3::-1]])
        L = n - q - 1
        # forcing for the step landing on node i+1 (i = q..n-2): -sum_j w_j Phi[i+j]
        forcing = -sum(w[j] * phi[j + 1: j + 1 + L] for j in range(q + 1))
        zi = lfiltic([1.0], a / a[0], v[q::-1][:q])
        v[q + 1:], _ = lfilter([1.0], a / a[0], forcing / a[0], zi=zi)
        return v

    def step(self, f_m):
        row = super().step(f_m)
        self.prev = row
        return row


_MARCHERS = {
    "forward1": _ForwardMarcher,
    "backward1": _BackwardMarcher,
    "cn": _CNMarcher,
    "rk4": _RK4Marcher,
    "richardson_cn": _RichardsonMarcher,
    "adams_moulton": _AdamsMarcher,
}


def make_marcher(spec: SchemeSpec, h: float, n_nodes: int, c: float, eta: float, **kwargs) -> _Marcher:
    if spec.method not in _MARCHERS:
        raise ValueError(f"{spec.name} is available for stability analysis only")
    return _MARCHERS[spec.method](spec, h, n_nodes, c, eta, **kwargs)


def solve_1d(
    spec: SchemeSpec | str,
    mesh: Mesh1D,
    boundary: LaguerreSeries,
    c: float,
    *,
    starter: str = "richardson",
    alarm_factor: float = 1e6,
    store: bool = True,
    on_row=None,
) -> Solution1D:
    """March every Laguerre coefficient across the mesh.

    Parameters
    ----------
    spec : SchemeSpec or preset name
    mesh : Mesh1D
    boundary : LaguerreSeries
        Coefficients ``f^m`` of the inflow signal ``v(0, t)``.
    c : float
        Positive wave speed.
    starter : {"richardson", "cn"}
        Fine-step scheme (step ``h/8``) producing the first nodes of Adams marches.
    alarm_factor : float
        Abort when ``max |v^m|`` exceeds this multiple of ``max |f^m|``.
    store : bool
        Keep all coefficient rows; otherwise only the energy profile is kept
        (``coeffs`` then holds a single row with ``sum_m (v^m)^2``).
    on_row : callable, optional
        Called as ``on_row(m, row)`` after each coefficient.

    Raises
    ------
    InstabilityError
        When the alarm threshold is crossed.
    """
    if isinstance(spec, str):
        spec = SchemeSpec.preset(spec)
    if not c > 0:
        raise ValueError("wave speed must be positive")
    params = boundary.params
    kwargs = {"starter": starter} if spec.method == "adams_moulton" else {}
    marcher = make_marcher(spec, mesh.h_x, mesh.n_nodes, c, params.eta, **kwargs)
    fbar = boundary.coeffs
    scale = float(np.max(np.abs(fbar))) if fbar.size else 0.0
    threshold = alarm_factor * scale
    rows = np.zeros((params.n_terms, mesh.n_nodes)) if store else np.zeros((1, mesh.n_nodes))
    for m in range(params.n_terms):
        row = marcher.step(float(fbar[m]))
        amp = float(np.max(np.abs(row)))
        if not np.isfinite(amp) or amp > threshold and scale > 0:
            raise InstabilityError(m, amp, threshold, f" ({spec.name})")
        if store:
            rows[m] = row
        else:
            rows[0] += row**2
        if on_row is not None:
            on_row(m, row)
    return Solution1D(mesh, params, rows, spec.name, marcher.acc.phi1)


def energy_profile(sol: Solution1D) -> np.ndarray:
    """``K(x_j) = sum_m (v^m_j)^2``, the time-integrated squared field at each node."""
    return np.sum(sol.coeffs**2, axis=0)


def l2_error(sol: Solution1D, exact, t_eval: float) -> float:
    """Relative discrete L2 error over mesh nodes at time ``t_eval``.

    ``exact`` is another :class:`Solution1D` on the same mesh or an array of exact
    field values at the nodes.
    """
    u_h = sol.field(t_eval)
    u = exact.field(t_eval) if isinstance(exact, Solution1D) else np.asarray(exact, dtype=float)
    if u.shape != u_h.shape:
        raise ValueError("solutions live on different meshes")
    denom = np.linalg.norm(u)
    if denom == 0.0:
        raise ZeroDivisionError("exact field is identically zero at t_eval")
    return float(np.linalg.norm(u - u_h) / denom)
