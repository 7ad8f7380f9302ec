"""Downward continuation of Laguerre coefficients for the 2D one-way system.

For every Laguerre index ``m`` the surface row ``u^m(x, 0)`` is continued in depth
row by row. Two depth integrators are provided:

* ``"am"`` - fifth-order Adams-Moulton; each step solves the banded reduced system
  for ``u`` and then the three auxiliary-field systems.
* ``"pc"`` - fifth-order Adams-Bashforth predictor with an Adams-Moulton corrector;
  only the auxiliary-field systems are solved (twice per step).

Both need four rows below the surface before they can start; these come from a
fine one-step march (backward Euler by default, Crank-Nicolson optional) on a strip
of step ``h_z / refine_by``. Before each ``m`` the running sums ``Phi_1(u)`` and
``Phi_2(psi_s)`` are spline-filtered along ``z``, which is what keeps the multistep
march stable.
"""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..laguerre import LaguerreSeries, PhiAccumulator, laguerre_functions
from ..schemes1d import AB5_WEIGHTS, AM5_WEIGHTS, InstabilityError
from ..splines import spline_filter
from .model import VelocityModel2D
from .operators import DrpStencil, PadeCoefficients, RowOperators

AM5 = np.array([float(a) for a in AM5_WEIGHTS])  # offsets -3..1
AB5 = np.array([float(a) for a in AB5_WEIGHTS])  # offsets -4..0
N_START = 4  # rows produced by the starter
RATIO_LIMITS = {"am": 0.4, "pc": 0.3}


def _row_sum(rows: np.ndarray) -> np.ndarray:
    # pairwise adds beat ndarray.sum(axis=0) on a few short rows
    return functools.reduce(np.add, rows)


class StabilityWarning(UserWarning):
    """Depth-to-lateral step ratio beyond the empirically stable range."""


class RateRing:
    """The last few rows of ``eta_t Theta + Phi_1(Theta)``, ``Theta = -u + sum_s psi_s``.

    Every row is stored twice so any window of consecutive rows is a contiguous view.
    """

    def __init__(self, nx: int, size: int = 5):
        self.size = size
        self.rows = np.zeros((2 * size, nx))
        self.index = [-1] * size

    def push(self, k: int, row: np.ndarray) -> None:
        slot = k % self.size
        self.rows[slot] = row
        self.rows[slot + self.size] = row
        self.index[slot] = k

    def get(self, k: int) -> np.ndarray:
        slot = k % self.size
        if self.index[slot] != k:
            raise KeyError(f"row {k} is no longer (or not yet) in the buffer")
        return self.rows[slot]

    def window(self, k_last: int, count: int) -> np.ndarray:
        """Rows ``k_last - count + 1 .. k_last`` (oldest first) as a read-only view."""
        if count > self.size:
            raise ValueError(f"window of {count} rows exceeds buffer size {self.size}")
        k0 = k_last - count + 1
        for k in range(k0, k_last + 1):
            if self.index[k % self.size] != k:
                raise KeyError(f"row {k} is no longer (or not yet) in the buffer")
        start = k0 % self.size
        view = self.rows[start: start + count]
        view.flags.writeable = False
        return view


@dataclass
class WavefieldState2D:
    """Current coefficient grids plus the running sums of all earlier ones.

    ``u`` has shape ``(nx, nz)``, ``psi`` ``(n_fractions, nx, nz)``.
    """

    u: np.ndarray
    psi: np.ndarray
    acc_u: PhiAccumulator
    acc_psi: PhiAccumulator
    ring: RateRing
    m: int = 0
    # per-m row-major working copies, set by begin_term: (nz, nx) and (nz, n_fractions, nx)
    phi1_theta: np.ndarray | None = field(default=None, repr=False)
    f_psi: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def zeros(cls, nx: int, nz: int, eta: float, n_fractions: int = 3) -> WavefieldState2D:
        return cls(
            u=np.zeros((nx, nz)),
            psi=np.zeros((n_fractions, nx, nz)),
            acc_u=PhiAccumulator.start(eta, 0.0, (nx, nz)),
            acc_psi=PhiAccumulator.start(eta, 0.0, (n_fractions, nx, nz)),
            ring=RateRing(nx),
        )

    @property
    def eta_t(self) -> float:
        return 0.5 * self.acc_u.eta

    @property
    def phi2(self) -> np.ndarray:
        return self.acc_psi.phi2

    def begin_term(self) -> None:
        """Zero the fields and cache ``Phi_1(Theta)`` and ``Phi_2(psi_s) / eta_t^2`` by row."""
        self.u[:] = 0.0
        self.psi[:] = 0.0
        phi1 = -self.acc_u.phi1 + self.acc_psi.phi1.sum(axis=0)
        self.phi1_theta = np.ascontiguousarray(phi1.T)
        self.f_psi = np.ascontiguousarray(self.acc_psi.phi2.transpose(2, 0, 1)) / self.eta_t**2

    def rate(self, k: int, u_row=None, psi_rows=None) -> np.ndarray:
        if u_row is None:
            u_row, psi_rows = self.u[:, k], self.psi[:, :, k]
        theta = psi_rows.sum(axis=0) - u_row
        return self.eta_t * theta + self.phi1_theta[k]

    def set_row(self, k: int, u_row: np.ndarray, psi_rows: np.ndarray, rate=None) -> None:
        self.u[:, k] = u_row
        self.psi[:, :, k] = psi_rows
        self.ring.push(k, self.rate(k, u_row, psi_rows) if rate is None else rate)

    def end_term(self) -> None:
        self.acc_u.update(self.u)
        self.acc_psi.update(self.psi)
        self.m += 1


def filter_phi_fields(
    state: WavefieldState2D, degree: int = 5, include_psi_phi1: bool = False
) -> WavefieldState2D:
    """Spline-filter ``Phi_1(u)`` and every ``Phi_2(psi_s)`` along depth (in place).

    With ``include_psi_phi1`` the sums ``Phi_1(psi_s)`` entering the ``u`` equation
    are filtered as well.
    """
    state.acc_u.phi1 = spline_filter(state.acc_u.phi1, degree, axis=1)
    state.acc_psi.phi2 = spline_filter(state.acc_psi.phi2, degree, axis=2)
    if include_psi_phi1:
        state.acc_psi.phi1 = spline_filter(state.acc_psi.phi1, degree, axis=2)
    return state


@dataclass
class Extrapolation2DResult:
    method: str
    times: np.ndarray
    snapshots: np.ndarray  # (n_times, nx, nz)
    max_coeff: np.ndarray  # max |u^m| per m
    energy_depth: np.ndarray  # sum over m and x of (u^m)^2, per depth row
    terms_done: int


class DepthExtrapolator:
    """Laguerre-domain downward continuation on a :class:`VelocityModel2D`.

    Parameters
    ----------
    model : VelocityModel2D
        Velocities used for the continuation; ``nz`` must be odd when filtering.
    eta : float
        Laguerre parameter.
    method : {"pc", "am"}
    filter_degree : int or None
        Degree of the depth filtration (``None`` disables it).
    starter : {"euler", "cn"}
        Fine-step scheme for the first four rows.
    refine_by : int
        Step reduction of the starter strip.
    alarm_factor : float
        Abort when ``max |u^m|`` exceeds this multiple of the boundary data maximum.
    """

    def __init__(
        self,
        model: VelocityModel2D,
        eta: float,
        method: str = "pc",
        *,
        pade: PadeCoefficients | None = None,
        stencil: DrpStencil | None = None,
        filter_degree: int | None = 5,
        starter: str = "euler",
        refine_by: int = 16,
        alarm_factor: float = 1e6,
        filter_psi_phi1: bool = True,
    ):
        if method not in RATIO_LIMITS:
            raise ValueError(f"method must be 'am' or 'pc', got {method!r}")
        if starter not in ("euler", "cn"):
            raise ValueError("starter must be 'euler' or 'cn'")
        if model.nz < N_START + 2:
            raise ValueError(f"need at least {N_START + 2} depth rows")
        if filter_degree is not None and model.nz % 2 == 0:
            raise ValueError("depth filtration needs an odd number of rows")
        self.model = model
        self.eta = float(eta)
        self.method = method
        self.pade = pade or PadeCoefficients()
        self.stencil = stencil or DrpStencil()
        self.filter_degree = filter_degree
        self.filter_psi_phi1 = filter_psi_phi1
        self.theta = 1.0 if starter == "euler" else 0.5
        self.refine_by = int(refine_by)
        self.alarm_factor = alarm_factor
        ratio = model.h_z / model.h_x
        if ratio >= RATIO_LIMITS[method]:
            warnings.warn(
                f"h_z/h_x = {ratio:.3g} is outside the stable range "
                f"(< {RATIO_LIMITS[method]}) for method {method!r}",
                StabilityWarning,
                stacklevel=2,
            )
        self._ops: dict = {}
        self.c_cols = [np.ascontiguousarray(model.c[:, k]) for k in range(model.nz)]
        self._row_ops: list = [None] * model.nz
        self._pc_consts: list = [None] * model.nz
        self._strip_c = self._strip_velocities()

    # -- operators --------------------------------------------------------
    def ops(self, c_row: np.ndarray) -> RowOperators:
        key = c_row.tobytes()
        ops = self._ops.get(key)
        if ops is None:
            ops = RowOperators(c_row, self.eta, self.pade, self.stencil, self.model.h_x)
            self._ops[key] = ops
        return ops

    def row_ops(self, k: int) -> RowOperators:
        """Operators of depth row ``k``."""
        ops = self._row_ops[k]
        if ops is None:
            ops = self._row_ops[k] = self.ops(self.c_cols[k])
        return ops

    def _strip_velocities(self) -> list[np.ndarray]:
        r = self.refine_by
        zf = np.arange(N_START * r + 1) / r
        rows = self.model.c[:, : N_START + 1]
        c = np.array([np.interp(zf, np.arange(N_START + 1), row) for row in rows])
        return [np.ascontiguousarray(c[:, j]) for j in range(c.shape[1])]

    # -- single steps -----------------------------------------------------
    def surface_row(self, state: WavefieldState2D, u0: np.ndarray) -> None:
        psi0 = self.row_ops(0).psi_from_scaled(u0, state.f_psi[0])
        state.set_row(0, u0, psi0)

    def implicit_step(
        self, state: WavefieldState2D, k: int, h: float, weights: np.ndarray, ops: RowOperators
    ) -> tuple[np.ndarray, np.ndarray]:
        """Generic implicit multistep row: ``weights`` oldest first, last one implicit."""
        a = float(weights[-1])
        q = weights.size - 1
        f_u = ops.c / h * state.u[:, k] + a * state.phi1_theta[k + 1]
        if q:
            f_u = f_u + weights[:-1] @ state.ring.window(k, q)
        f_psi = state.f_psi[k + 1]
        u = ops.reduced_lu(h, a).solve(ops.reduced_rhs(f_u, f_psi, a))
        psi = ops.psi_direct_scaled(u, f_psi)
        return u, psi

    def am_step(self, state: WavefieldState2D, k: int) -> None:
        """Adams-Moulton row ``k + 1`` from rows ``k - 3 .. k``."""
        u, psi = self.implicit_step(state, k, self.model.h_z, AM5, self.row_ops(k + 1))
        state.set_row(k + 1, u, psi)

    def pc_step(self, state: WavefieldState2D, k: int) -> None:
        """Predictor-corrector row ``k + 1`` from rows ``k - 4 .. k``."""
        ops = self.row_ops(k + 1)
        consts = self._pc_consts[k + 1]
        if consts is None:
            c_h = ops.c / self.model.h_z
            consts = self._pc_consts[k + 1] = (c_h, 1.0 / c_h, 1.0 / (c_h + AM5[-1] * ops.eta_t))
        c_h, h_c, inv_denom = consts
        a_et = AM5[-1] * ops.eta_t
        rates = state.ring.window(k, 5)
        g = ops.scale_rhs(state.f_psi[k + 1])
        u_k = state.u[:, k]
        # predictor (explicit)
        u_p = u_k + h_c * (AB5 @ rates)
        psi_p = ops.psi_from_prepared(u_p, g)
        # corrector, u explicit once psi is fixed
        base = c_h * u_k + AM5[:-1] @ rates[1:] + AM5[-1] * state.phi1_theta[k + 1]
        u_c = (base + a_et * _row_sum(psi_p)) * inv_denom
        psi = ops.psi_from_prepared(u_c, g)
        psi_sum = _row_sum(psi)
        u = (base + a_et * psi_sum) * inv_denom
        rate = ops.eta_t * (psi_sum - u) + state.phi1_theta[k + 1]
        state.set_row(k + 1, u, psi, rate)

    am_downward_step = am_step
    pc_downward_step = pc_step

    # -- starter ----------------------------------------------------------
    def new_strip_state(self) -> WavefieldState2D:
        return WavefieldState2D.zeros(
            self.model.nx, N_START * self.refine_by + 1, self.eta, self.pade.n_fractions
        )

    def startup_rows(self, state: WavefieldState2D, strip: WavefieldState2D) -> None:
        """Fill rows ``1 .. 4`` of ``state`` from a fine one-step march on ``strip``.

        ``state`` row 0 must already be set; ``strip`` carries its own running sums
        and is advanced to the next ``m``.
        """
        r = self.refine_by
        h = self.model.h_z / r
        w = np.array([1.0 - self.theta, self.theta])
        strip.begin_term()
        strip.set_row(0, state.u[:, 0], state.psi[:, :, 0])
        for j in range(N_START * r):
            u, psi = self.implicit_step(strip, j, h, w, self.ops(self._strip_c[j + 1]))
            strip.set_row(j + 1, u, psi)
        for k in range(1, N_START + 1):
            state.set_row(k, strip.u[:, k * r], strip.psi[:, :, k * r])
        strip.end_term()

    # -- whole runs -------------------------------------------------------
    def new_state(self) -> WavefieldState2D:
        return WavefieldState2D.zeros(self.model.nx, self.model.nz, self.eta, self.pade.n_fractions)

    def advance_term(self, state: WavefieldState2D, strip: WavefieldState2D, u0: np.ndarray) -> None:
        """Compute all rows of coefficient ``state.m`` from its surface row ``u0``."""
        if self.filter_degree is not None and state.m > 0:
            filter_phi_fields(state, self.filter_degree, self.filter_psi_phi1)
        state.begin_term()
        self.surface_row(state, u0)
        self.startup_rows(state, strip)
        step = self.am_step if self.method == "am" else self.pc_step
        for k in range(N_START, self.model.nz - 1):
            step(state, k)

    def run(
        self,
        boundary: LaguerreSeries,
        times=(),
        *,
        n_terms: int | None = None,
        on_term=None,
    ) -> Extrapolation2DResult:
        """Continue all coefficients and sum snapshots at ``times``.

        ``boundary.coeffs`` has shape ``(n_terms, nx)``: the Laguerre coefficients of
        the surface wavefield. ``on_term(m, state)`` is called after each ``m``.

        Raises
        ------
        InstabilityError
            When a coefficient grid exceeds the alarm threshold.
        """
        g = np.asarray(boundary.coeffs, dtype=float)
        if g.ndim != 2 or g.shape[1] != self.model.nx:
            raise ValueError(f"boundary coefficients must have shape (n_terms, {self.model.nx})")
        n = g.shape[0] if n_terms is None else min(int(n_terms), g.shape[0])
        times = np.atleast_1d(np.asarray(times, dtype=float))
        basis = laguerre_functions(self.eta, times, n - 1) if times.size else np.zeros((n, 0))
        snaps = np.zeros((times.size, self.model.nx, self.model.nz))
        scale = float(np.max(np.abs(g[:n]))) if n else 0.0
        threshold = self.alarm_factor * scale
        state, strip = self.new_state(), self.new_strip_state()
        max_coeff = np.zeros(n)
        energy = np.zeros(self.model.nz)
        for m in range(n):
            self.advance_term(state, strip, g[m])
            amp = float(np.max(np.abs(state.u)))
            max_coeff[m] = amp
            if not np.isfinite(amp) or (scale > 0 and amp > threshold):
                raise InstabilityError(m, amp, threshold, f" ({self.method}, depth march)")
            for i in range(times.size):
                snaps[i] += basis[m, i] * state.u
            energy += np.sum(state.u**2, axis=0)
            if on_term is not None:
                on_term(m, state)
            state.end_term()
        return Extrapolation2DResult(self.method, times, snaps, max_coeff, energy, n)
