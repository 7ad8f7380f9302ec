"""Lateral operators of the rational square-root (Pade) one-way system.

After the Laguerre transform in time, the field ``u`` and three auxiliary fields
``psi_s`` obey, on each depth row,

    c^2 gamma_s L psi_s - eta_t^2 psi_s + beta_s c^2 L u = Phi_2(psi_s)

with ``L`` a banded second-difference operator in ``x`` and ``eta_t = eta / 2``.
With ``M_s = (gamma_s c^2 / eta_t^2) L - I`` and ``F_psi_s = Phi_2(psi_s) / eta_t^2``
this gives ``psi_s = M_s^{-1} F_psi_s - (beta_s / gamma_s)(I + M_s^{-1}) u``.

Substituting into an implicit depth step whose implicit weight is ``a``,

    diag(c/h) u + a eta_t (u - sum_s psi_s) = F_u,

and multiplying by ``M_1 M_2 M_3`` gives the banded reduced system solved here:

    [M_1 M_2 M_3 diag(c/h + a eta_t (1 + sum_s beta_s/gamma_s))
     + a eta_t sum_s (beta_s/gamma_s) P_s] u = M_1 M_2 M_3 F_u + a eta_t sum_s P_s F_psi_s

where ``P_s`` is the product of the two factors other than ``M_s``. Every ``M_s`` is
``gamma_s X - I`` for the same matrix ``X = diag(c^2) L / eta_t^2``, so the factors
commute even when ``c`` varies along the row.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from ..numkernels import BandedCholesky, BandedLU, BandedMatrix, banded_cholesky_factor


@dataclass(frozen=True)
class PadeCoefficients:
    """Real rational approximation of the square root with ``n`` partial fractions."""

    gamma: tuple = (0.972926132, 0.744418059, 0.150843924)
    beta: tuple = (0.004210420, 0.081312882, 0.414236605)

    def __post_init__(self):
        if len(self.gamma) != len(self.beta) or not self.gamma:
            raise ValueError("gamma and beta must have the same non-zero length")
        for v in self.gamma + self.beta:
            if not 0 < v < 1:
                raise ValueError("coefficients must lie in (0, 1)")

    @property
    def n_fractions(self) -> int:
        return len(self.gamma)

    @property
    def ratios(self) -> np.ndarray:
        return np.array(self.beta) / np.array(self.gamma)


@dataclass(frozen=True)
class DrpStencil:
    """Symmetric second-derivative stencil ``(a0 f_i + sum_j a_j (f_{i-j} + f_{i+j})) / h^2``.

    Defaults are dispersion-relation-preserving coefficients with half-width 6.
    """

    a0: float = -3.12513824
    a: tuple = (1.84108651, -0.35706478, 0.10185626, -0.02924772, 0.00696837, -0.00102952)

    @property
    def half_width(self) -> int:
        return len(self.a)

    def symbol(self, kh) -> np.ndarray:
        """Multiplier of ``exp(i k x)`` times ``h^2`` (exact value ``-(k h)^2``)."""
        kh = np.asarray(kh, dtype=float)
        j = np.arange(1, self.half_width + 1)
        return self.a0 + 2.0 * np.sum(np.array(self.a) * np.cos(np.multiply.outer(kh, j)), axis=-1)


def drp_apply(row, stencil: DrpStencil, h_x: float) -> np.ndarray:
    """Apply the stencil along the last axis with zeros outside the domain."""
    f = np.asarray(row, dtype=float)
    n = f.shape[-1]
    N = stencil.half_width
    if n <= 2 * N:
        raise ValueError(f"need more than {2 * N} points")
    pad = [(0, 0)] * (f.ndim - 1) + [(N, N)]
    g = np.pad(f, pad)
    out = stencil.a0 * f
    for j, aj in enumerate(stencil.a, start=1):
        out = out + aj * (g[..., N - j: N - j + n] + g[..., N + j: N + j + n])
    return out / h_x**2


@lru_cache(maxsize=32)
def drp_matrix(n: int, stencil: DrpStencil, h_x: float) -> BandedMatrix:
    """Banded matrix of :func:`drp_apply` (zero extension truncates the Toeplitz band)."""
    N = stencil.half_width
    diags = {0: stencil.a0 / h_x**2}
    for j, aj in enumerate(stencil.a, start=1):
        diags[j] = diags[-j] = aj / h_x**2
    return BandedMatrix.from_diagonals(diags, n)


def _block_diagonal(blocks: list[BandedMatrix]) -> BandedMatrix:
    # equal bands; cross-block storage entries are already zero-masked
    b0 = blocks[0]
    data = np.hstack([b.data for b in blocks])
    return BandedMatrix(b0.n * len(blocks), b0.lower, b0.upper, data)


class RowOperators:
    """Everything needed to advance one depth row with velocity ``c_row`` fixed.

    Factorizations are computed lazily and kept, because the same matrices serve
    every Laguerre index.
    """

    def __init__(self, c_row, eta: float, pade: PadeCoefficients, stencil: DrpStencil, h_x: float):
        self.c = np.asarray(c_row, dtype=float)
        self.nx = self.c.size
        self.eta_t = 0.5 * eta
        self.pade = pade
        self.L = drp_matrix(self.nx, stencil, float(h_x))
        self._L_csr = self.L.to_sparse()
        c2 = self.c**2
        eye = BandedMatrix.identity(self.nx)
        # M_s = D_s L - I with D_s = gamma_s c^2 / eta_t^2 > 0
        self.D = np.array([g * c2 / self.eta_t**2 for g in pade.gamma])
        self.M = [self.L.row_scale(d) - eye for d in self.D]
        self._neg_inv_D = -1.0 / self.D
        self._ratios = pade.ratios[:, None]
        self._beta = np.array(pade.beta)[:, None]
        # M_s x = f - r_s u  <=>  (D_s^{-1} - L) x = -D_s^{-1} f + D_s^{-1} r_s u
        self._ru_coef = -self._neg_inv_D * self._ratios
        # full-shape copy: broadcasting a (3, 1) column is slower on short rows
        self._ratios_full = np.broadcast_to(self._ratios, self.D.shape).copy()
        self._c2_over_et2 = c2 / self.eta_t**2
        self._psi_chol: BandedCholesky | None = None
        self._products: dict | None = None
        self._reduced: dict = {}

    # -- psi solves -------------------------------------------------------
    @property
    def psi_chol(self) -> BandedCholesky:
        """Factor of ``blockdiag(D_s^{-1} - L)``, symmetric positive definite.

        ``M_s x = r`` is solved as ``(D_s^{-1} - L) x = -D_s^{-1} r``; the row scaling
        makes each block symmetric even when ``c`` varies along the row.
        """
        if self._psi_chol is None:
            blocks = [BandedMatrix.from_diagonals({0: 1.0 / d}, self.nx) - self.L for d in self.D]
            self._psi_chol = banded_cholesky_factor(_block_diagonal(blocks), "auxiliary-field system")
        return self._psi_chol

    def solve_m(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``M_s x_s = rhs_s`` for all three ``s`` at once; ``rhs`` is (3, nx)."""
        b = (self._neg_inv_D * rhs).ravel()
        return self.psi_chol.solve(b).reshape(rhs.shape)

    def psi_from_u(self, u: np.ndarray, phi2: np.ndarray) -> np.ndarray:
        """``psi_s = M_s^{-1}(-(beta_s/gamma_s) u + Phi_2/eta_t^2) - (beta_s/gamma_s) u``."""
        return self.psi_from_scaled(u, np.asarray(phi2) / self.eta_t**2)

    def psi_from_scaled(self, u: np.ndarray, f_psi: np.ndarray) -> np.ndarray:
        """As :meth:`psi_from_u` with ``f_psi = Phi_2 / eta_t^2`` given."""
        return self.psi_from_prepared(u, self.scale_rhs(f_psi))

    def scale_rhs(self, f_psi: np.ndarray) -> np.ndarray:
        """``-D_s^{-1} f_psi``, the part of the SPD right-hand side that does not depend on ``u``."""
        return self._neg_inv_D * f_psi

    def psi_from_prepared(self, u: np.ndarray, g: np.ndarray) -> np.ndarray:
        """:meth:`psi_from_u` with ``g = scale_rhs(f_psi)``; reuse ``g`` across calls on one row."""
        b = g + self._ru_coef * u
        return self.psi_chol.solve(b.ravel()).reshape(g.shape) - self._ratios_full * u

    def psi_direct(self, u: np.ndarray, phi2: np.ndarray) -> np.ndarray:
        """``M_s psi_s = (-beta_s c^2 L u + Phi_2) / eta_t^2`` (same result, no identity used)."""
        return self.psi_direct_scaled(u, np.asarray(phi2) / self.eta_t**2)

    def psi_direct_scaled(self, u: np.ndarray, f_psi: np.ndarray) -> np.ndarray:
        """As :meth:`psi_direct` with ``f_psi = Phi_2 / eta_t^2`` given."""
        lu_ = self._c2_over_et2 * (self._L_csr @ u)
        return self.solve_m(f_psi - self._beta * lu_)

    # -- reduced system ---------------------------------------------------
    @property
    def products(self) -> dict:
        if self._products is None:
            M1, M2, M3 = self.M
            M12 = M1 @ M2
            p = {"123": M12 @ M3, "23": M2 @ M3, "13": M1 @ M3, "12": M12}
            p["rhs"] = sparse.hstack(
                [p[k].to_sparse() for k in ("123", "23", "13", "12")], format="csr"
            )
            self._products = p
        return self._products

    def reduced_matrix(self, h_z: float, a: float) -> BandedMatrix:
        p = self.products
        r = self.pade.ratios
        scale = self.c / h_z + a * self.eta_t * (1.0 + r.sum())
        A = p["123"].col_scale(scale)
        for rs, key in zip(r, ("23", "13", "12")):
            A = A + p[key] * (a * self.eta_t * rs)
        return A

    def reduced_lu(self, h_z: float, a: float) -> BandedLU:
        key = (float(h_z), float(a))
        if key not in self._reduced:
            self._reduced[key] = self.reduced_matrix(h_z, a).factor("reduced depth-step system")
        return self._reduced[key]

    def reduced_rhs(self, f_u: np.ndarray, f_psi: np.ndarray, a: float) -> np.ndarray:
        stacked = np.concatenate([f_u, (a * self.eta_t) * np.ravel(f_psi)])
        return self.products["rhs"] @ stacked

    def commutator_norm(self) -> float:
        """``max ||M_i M_j - M_j M_i||_inf`` (round-off level; kept as a diagnostic)."""
        worst = 0.0
        for i in range(len(self.M)):
            for j in range(i + 1, len(self.M)):
                d = (self.M[i] @ self.M[j]) - (self.M[j] @ self.M[i])
                worst = max(worst, d.norm_inf())
        return worst


def assemble_reduced(
    ops: RowOperators, h_z: float, a: float, f_u: np.ndarray, phi2: np.ndarray
) -> tuple[BandedMatrix, np.ndarray]:
    """Reduced operator and right-hand side for the implicit depth step.

    Parameters
    ----------
    ops : RowOperators
        Operators of the target row (velocity frozen there).
    h_z : float
        Depth step.
    a : float
        Weight of the implicit (target-row) term, e.g. ``251/720`` for AM5.
    f_u : ndarray, shape (nx,)
        Explicit part: ``(c/h_z) u_k`` plus weighted past rates plus
        ``a Phi_1(Theta)`` at the target row.
    phi2 : ndarray, shape (3, nx)
        ``Phi_2(psi_s)`` at the target row.
    """
    A = ops.reduced_matrix(h_z, a)
    rhs = ops.reduced_rhs(f_u, np.asarray(phi2) / ops.eta_t**2, a)
    return A, rhs
