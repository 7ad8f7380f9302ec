"""Laguerre functions, forward/inverse transforms in time, and recurrence accumulators.

The basis is ``l_m(eta t) = sqrt(eta) exp(-eta t / 2) L_m(eta t)``, orthonormal on
``[0, inf)``. Time derivatives become running sums over lower coefficient indices,
tracked by :class:`PhiAccumulator`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# rescale the unweighted recurrence before it can overflow
_RESCALE_AT = 1e150


@dataclass(frozen=True)
class LaguerreParams:
    eta: float
    n_terms: int

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if int(self.n_terms) < 1:
            raise ValueError(f"n_terms must be >= 1, got {self.n_terms}")


@dataclass
class LaguerreSeries:
    """Coefficients ``g_m`` of a signal in the Laguerre basis.

    ``coeffs`` may carry trailing axes (e.g. one series per receiver); axis 0 is ``m``.
    """

    params: LaguerreParams
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape[0] != self.params.n_terms:
            raise ValueError(
                f"expected {self.params.n_terms} coefficients, got {self.coeffs.shape[0]}"
            )

    def __call__(self, times) -> np.ndarray:
        return inverse_transform(self, times)

    @property
    def energy(self) -> np.ndarray:
        """Sum of squared coefficients (equal to the signal's L2 energy)."""
        return np.sum(self.coeffs**2, axis=0)


def laguerre_functions(eta: float, t, m_max: int) -> np.ndarray:
    """Evaluate ``l_m(eta t)`` for ``m = 0..m_max``.

    Parameters
    ----------
    eta : float
        Transform parameter (1/s), positive.
    t : float or array_like
        Non-negative times.
    m_max : int
        Highest index.

    Returns
    -------
    ndarray, shape (m_max + 1,) + shape(t)

    Notes
    -----
    The three-term recurrence runs on the unweighted polynomials with a per-point
    logarithmic scale, so neither ``L_m`` (large for big ``eta t``) nor
    ``exp(-eta t / 2)`` (underflows beyond ``eta t ~ 1490``) is formed on its own.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise ValueError("times must be finite and non-negative")
    out = np.empty((m_max + 1,) + t_arr.shape)
    for m, row in _laguerre_rows(eta, t_arr.ravel(), m_max):
        out[m] = row.reshape(t_arr.shape)
    return out


def _laguerre_rows(eta: float, t: np.ndarray, m_max: int):
    """Yield ``(m, l_m(eta t))`` one row at a time (O(len(t)) memory)."""
    y = eta * t
    log_scale = -0.5 * y
    factor = np.sqrt(eta) * np.exp(log_scale)
    prev = np.zeros_like(y)
    cur = np.ones_like(y)
    yield 0, factor * cur
    for m in range(m_max):
        nxt = ((2 * m + 1 - y) * cur - m * prev) / (m + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_AT
        if big.any():
            cur[big] /= _RESCALE_AT
            prev[big] /= _RESCALE_AT
            log_scale[big] += np.log(_RESCALE_AT)
            factor[big] = np.sqrt(eta) * np.exp(log_scale[big])
        yield m + 1, factor * cur


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.zeros_like(t)
    dt = np.diff(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def forward_transform(
    times, values, params: LaguerreParams, solver: str = "projection"
) -> LaguerreSeries:
    """Least-squares Laguerre coefficients of a sampled signal.

    Parameters
    ----------
    times : array_like, shape (P,)
        Uniformly spaced, non-negative sample times.
    values : array_like, shape (P,) or (P, K)
        Samples; several traces are transformed at once along axis 1.
    params : LaguerreParams
    solver : {"projection", "normal"}
        ``"projection"`` uses the orthonormality of the basis: the quadrature-weighted
        normal matrix is the identity, so the least-squares solution is the weighted
        projection, computed in O(n_terms * P). ``"normal"`` assembles the normal
        matrix explicitly and solves it by Cholesky with a small diagonal shift; use it
        only when the sampling cannot resolve the basis (cost O(n_terms^2 * P)).

    Notes
    -----
    The signal should decay to zero before the end of the record.
    """
    t = np.asarray(times, dtype=float)
    g = np.asarray(values, dtype=float)
    if t.ndim != 1 or g.shape[0] != t.size:
        raise ValueError("times and values must have matching first dimension")
    if t.size < 2:
        raise ValueError("need at least two samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0):
        raise ValueError("samples must be uniformly spaced")
    w = _trapezoid_weights(t)
    wg = w.reshape((-1,) + (1,) * (g.ndim - 1)) * g
    n = params.n_terms
    if solver == "projection":
        coeffs = np.empty((n,) + g.shape[1:])
        for m, row in _laguerre_rows(params.eta, t, n - 1):
            coeffs[m] = row @ wg
        return LaguerreSeries(params, coeffs)
    if solver != "normal":
        raise ValueError(f"unknown solver {solver!r}")
    if n > t.size:
        raise np.linalg.LinAlgError("more basis functions than samples")
    basis = laguerre_functions(params.eta, t, n - 1)
    gram = (basis * w) @ basis.T
    rhs = basis @ wg
    jitter = 1e-14 * np.trace(gram) / n
    try:
        chol = np.linalg.cholesky(gram + jitter * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("normal matrix is singular; reduce n_terms") from exc
    coeffs = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    return LaguerreSeries(params, coeffs)


def inverse_transform(series: LaguerreSeries, times) -> np.ndarray:
    """Sum the series at the requested times; result has shape ``times.shape + coeffs.shape[1:]``."""
    t = np.asarray(times, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    c = series.coeffs
    flat = t.ravel()
    out = np.zeros((flat.size,) + c.shape[1:])
    for m, row in _laguerre_rows(series.params.eta, flat, series.params.n_terms - 1):
        out += np.multiply.outer(row, c[m])
    return out.reshape(t.shape + c.shape[1:])


@dataclass
class PhiAccumulator:
    """Running sums standing in for first and second time derivatives.

    ``phi1 = sqrt(eta) g(0) + eta * sum_{j<m} g_j`` and
    ``phi2 = eta^2 * sum_{j<m} (m - j) g_j``. Works elementwise on arrays, so one
    accumulator holds a whole grid. Updates must arrive in increasing ``m``.
    """

    eta: float
    phi1: np.ndarray
    phi2: np.ndarray
    partial_sum: np.ndarray = field(repr=False)
    m_current: int = 0

    @classmethod
    def start(cls, eta: float, g0=0.0, shape=()) -> PhiAccumulator:
        g0 = np.broadcast_to(np.asarray(g0, dtype=float), shape).copy()
        return cls(
            eta=eta,
            phi1=np.sqrt(eta) * g0,
            phi2=np.zeros(shape),
            partial_sum=np.zeros(shape),
        )

    def update(self, g_prev) -> PhiAccumulator:
        """Fold in coefficient ``g_m`` and advance to ``m + 1`` (in place)."""
        self.phi1 = self.phi1 + self.eta * g_prev
        self.partial_sum = self.partial_sum + g_prev
        # Phi2(m+1) - Phi2(m) = eta^2 * sum_{j<=m} g_j
        self.phi2 = self.phi2 + self.eta**2 * self.partial_sum
        self.m_current += 1
        return self


def phi1_update(acc: PhiAccumulator, g_prev) -> PhiAccumulator:
    return acc.update(g_prev)


phi2_update = phi1_update


def phi1_direct(eta: float, coeffs, g0: float = 0.0) -> float:
    """``Phi_1`` at ``m = len(coeffs)`` by direct summation (reference)."""
    acc = np.sqrt(eta) * g0
    for c in coeffs:
        acc = acc + eta * c
    return acc


def phi2_direct(eta: float, coeffs) -> float:
    """``Phi_2`` at ``m = len(coeffs)`` by direct summation (reference)."""
    m = len(coeffs)
    return eta**2 * sum((m - j) * c for j, c in enumerate(coeffs))


def relative_truncation_error(times, values, series: LaguerreSeries) -> float:
    """Relative L2 misfit between samples and the truncated series on the same record."""
    t = np.asarray(times, dtype=float)
    g = np.asarray(values, dtype=float)
    w = _trapezoid_weights(t)
    r = g - inverse_transform(series, t)
    return float(np.sqrt(np.sum(w * r**2) / np.sum(w * g**2)))


def _support_of(signal, t0: float) -> tuple[float, float]:
    support = getattr(signal, "support", None)
    if support is not None:
        return support()
    return 0.0, t0


def _shifted_samples(signal, record_length: float, dt: float | None):
    # the signal moved to t0 = record_length, with room after it to decay
    shifted = signal.shifted(record_length)
    _, w_hi = _support_of(shifted, record_length)
    t_end = max(record_length, w_hi) + 0.25 * record_length
    dt = dt if dt is not None else record_length / 10000.0
    t = np.arange(0.0, t_end + dt / 2, dt)
    return t, shifted(t)


def eta_truncation_error(
    signal, record_length: float, n_terms: int, eta: float, dt: float | None = None
) -> float:
    """Relative L2 error of the ``n_terms`` expansion of ``signal`` moved to ``t0 = record_length``."""
    if record_length <= 0:
        raise ValueError("record_length must be positive")
    t, g = _shifted_samples(signal, record_length, dt)
    series = forward_transform(t, g, LaguerreParams(float(eta), int(n_terms)))
    return relative_truncation_error(t, g, series)


def default_eta_candidates() -> np.ndarray:
    """Geometric sweep ``25 * 2^(k/4)``, ``k = 0 .. 32`` (25 to 6400 1/s)."""
    return 25.0 * 2.0 ** (np.arange(0, 33) / 4.0)


def select_eta(
    signal,
    record_length: float,
    n_terms: int,
    tol: float = 1e-10,
    candidates=None,
    dt: float | None = None,
) -> float:
    """Pick the smallest ``eta`` that represents the latest-arriving signal to ``tol``.

    ``signal`` is a :class:`~laguerre_owwe.wavelet.SourceWavelet` (or any object with
    a ``shifted(t0)`` method returning a callable). It is moved to
    ``t0 = record_length``, the worst case for a record of that length, and the
    relative L2 error of its ``n_terms``-term expansion is measured for each
    candidate ``eta`` (geometric sweep by default).

    Raises
    ------
    ValueError
        If no candidate reaches ``tol``.
    """
    if record_length <= 0:
        raise ValueError("record_length must be positive")
    candidates = default_eta_candidates() if candidates is None else candidates
    t, g = _shifted_samples(signal, record_length, dt)
    for eta in sorted(candidates):
        series = forward_transform(t, g, LaguerreParams(float(eta), int(n_terms)))
        if relative_truncation_error(t, g, series) < tol:
            return float(eta)
    raise ValueError(f"no eta among candidates reaches tolerance {tol} with {n_terms} terms")
