"""Banded linear algebra and FFT convolution shared by the solvers.

Banded matrices are stored column-aligned in the LAPACK/``scipy.linalg.solve_banded``
layout: ``data[upper + i - j, j] == A[i, j]``. Factorization and substitution are
delegated to LAPACK: ``?gbtrf``/``?gbtrs`` (partial pivoting inside the band) for
general matrices, ``?pbtrf``/``?pbtrs`` for symmetric positive definite ones.
"""
from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import lapack


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a banded factorization meets an exactly zero pivot."""

    def __init__(self, pivot: int, context: str = ""):
        self.pivot = pivot
        msg = f"banded matrix is singular at pivot {pivot}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class BandedMatrix:
    """Square real matrix with ``lower`` sub- and ``upper`` super-diagonals.

    Parameters
    ----------
    n : int
        Matrix order.
    lower, upper : int
        Bandwidths below and above the main diagonal.
    data : ndarray, shape (lower + upper + 1, n), optional
        Diagonal-ordered storage. Zero-initialized when omitted.
    """

    def __init__(self, n: int, lower: int, upper: int, data: np.ndarray | None = None):
        if n < 1 or lower < 0 or upper < 0:
            raise ValueError("invalid banded matrix shape")
        self.n = int(n)
        self.lower = int(min(lower, n - 1))
        self.upper = int(min(upper, n - 1))
        shape = (self.lower + self.upper + 1, self.n)
        if data is None:
            data = np.zeros(shape)
        else:
            data = np.array(data, dtype=float)
            if data.shape != (lower + upper + 1, self.n):
                raise ValueError(f"storage shape {data.shape} does not match band")
            # bandwidths wider than the matrix carry only padding rows
            data = data[upper - self.upper: upper + self.lower + 1]
        self.data = data
        self._mask_outside()

    def _mask_outside(self) -> None:
        # entries of the storage that do not correspond to matrix positions
        for p in range(1, self.upper + 1):
            self.data[self.upper - p, :p] = 0.0
        for p in range(1, self.lower + 1):
            self.data[self.upper + p, self.n - p:] = 0.0

    # -- construction -----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> BandedMatrix:
        return cls(n, 0, 0, np.ones((1, n)))

    @classmethod
    def from_diagonals(cls, diagonals: dict[int, np.ndarray | float], n: int) -> BandedMatrix:
        """Build from ``{offset: values}`` with ``values[i] = A[i, i + offset]``."""
        lower = max([0] + [-p for p in diagonals if p < 0])
        upper = max([0] + [p for p in diagonals if p > 0])
        A = cls(n, lower, upper)
        for p, vals in diagonals.items():
            A.set_diagonal(p, vals)
        return A

    @classmethod
    def from_dense(cls, a: np.ndarray, lower: int, upper: int) -> BandedMatrix:
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        A = cls(n, lower, upper)
        for p in range(-A.lower, A.upper + 1):
            A.set_diagonal(p, np.diagonal(a, offset=p))
        return A

    def copy(self) -> BandedMatrix:
        return BandedMatrix(self.n, self.lower, self.upper, self.data.copy())

    # -- diagonal access --------------------------------------------------
    def diagonal(self, p: int) -> np.ndarray:
        """Return ``A[i, i + p]`` for all valid ``i``."""
        if p > self.upper or -p > self.lower:
            return np.zeros(self.n - abs(p))
        row = self.data[self.upper - p]
        return row[p:].copy() if p >= 0 else row[: self.n + p].copy()

    def set_diagonal(self, p: int, values) -> None:
        if p > self.upper or -p > self.lower:
            raise ValueError(f"offset {p} outside band ({self.lower}, {self.upper})")
        m = self.n - abs(p)
        vals = np.broadcast_to(np.asarray(values, dtype=float), (m,))
        if p >= 0:
            self.data[self.upper - p, p:] = vals
        else:
            self.data[self.upper - p, :m] = vals

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for p in range(-self.lower, self.upper + 1):
            m = self.n - abs(p)
            idx = np.arange(m)
            if p >= 0:
                out[idx, idx + p] = self.diagonal(p)
            else:
                out[idx - p, idx] = self.diagonal(p)
        return out

    # -- arithmetic -------------------------------------------------------
    def matvec(self, x: np.ndarray) -> np.ndarray:
        """``A @ x`` for ``x`` of shape (n,) or (n, k)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        n = self.n
        for p in range(-self.lower, self.upper + 1):
            d = self.diagonal(p)
            if x.ndim == 2:
                d = d[:, None]
            if p >= 0:
                out[: n - p] += d * x[p:]
            else:
                out[-p:] += d * x[: n + p]
        return out

    def __matmul__(self, other):
        if isinstance(other, BandedMatrix):
            return banded_product(self, other)
        return self.matvec(other)

    def _combine(self, other: BandedMatrix, a: float, b: float) -> BandedMatrix:
        if other.n != self.n:
            raise ValueError("size mismatch")
        out = BandedMatrix(self.n, max(self.lower, other.lower), max(self.upper, other.upper))
        for p in range(-out.lower, out.upper + 1):
            out.set_diagonal(p, a * self.diagonal(p) + b * other.diagonal(p))
        return out

    def __add__(self, other: BandedMatrix) -> BandedMatrix:
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other: BandedMatrix) -> BandedMatrix:
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, s: float) -> BandedMatrix:
        return BandedMatrix(self.n, self.lower, self.upper, self.data * float(s))

    __rmul__ = __mul__

    def row_scale(self, d: np.ndarray) -> BandedMatrix:
        """Return ``diag(d) @ A``."""
        d = np.asarray(d, dtype=float)
        out = BandedMatrix(self.n, self.lower, self.upper)
        for p in range(-self.lower, self.upper + 1):
            m = self.n - abs(p)
            rows = np.arange(m) if p >= 0 else np.arange(m) - p
            out.set_diagonal(p, self.diagonal(p) * d[rows])
        return out

    def col_scale(self, d: np.ndarray) -> BandedMatrix:
        """Return ``A @ diag(d)``."""
        d = np.asarray(d, dtype=float)
        return BandedMatrix(self.n, self.lower, self.upper, self.data * d[None, :])

    def to_sparse(self):
        """CSR copy (the storage is already scipy's column-aligned DIA layout)."""
        offsets = np.arange(self.upper, -self.lower - 1, -1)
        return sparse.dia_matrix((self.data, offsets), shape=(self.n, self.n)).tocsr()

    def norm_inf(self) -> float:
        absA = BandedMatrix(self.n, self.lower, self.upper, np.abs(self.data))
        return float(absA.matvec(np.ones(self.n)).max())

    def factor(self, context: str = "") -> BandedLU:
        return banded_lu_factor(self, context)

    def __repr__(self) -> str:
        return f"BandedMatrix(n={self.n}, lower={self.lower}, upper={self.upper})"


class BandedLU:
    """LU factors of a :class:`BandedMatrix` (read-only; solves may share it)."""

    def __init__(self, lu: np.ndarray, piv: np.ndarray, n: int, lower: int, upper: int):
        self.lu = lu
        self.piv = piv
        self.n = n
        self.lower = lower
        self.upper = upper
        self.lu.setflags(write=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return banded_solve(self, rhs)


def banded_lu_factor(A: BandedMatrix, context: str = "") -> BandedLU:
    """Factor ``A = P L U`` with partial pivoting confined to the band.

    Raises
    ------
    SingularMatrixError
        If a zero pivot is met; ``pivot`` is the zero-based row index.
    """
    kl, ku = A.lower, A.upper
    ab = np.zeros((2 * kl + ku + 1, A.n))
    ab[kl:] = A.data
    lu, piv, info = lapack.dgbtrf(ab, kl, ku)
    if info > 0:
        raise SingularMatrixError(info - 1, context)
    if info < 0:
        raise ValueError(f"dgbtrf: illegal argument {-info}")
    return BandedLU(lu, piv, A.n, kl, ku)


def banded_solve(factored: BandedLU, rhs: np.ndarray) -> np.ndarray:
    """Solve against precomputed factors; ``rhs`` may be (n,) or (n, k)."""
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != factored.n:
        raise ValueError("right-hand side has wrong length")
    x, info = lapack.dgbtrs(factored.lu, factored.lower, factored.upper, b, factored.piv)
    if info != 0:
        raise ValueError(f"dgbtrs failed with info={info}")
    return x


class BandedCholesky:
    """Cholesky factor (upper storage) of a symmetric positive definite banded matrix."""

    def __init__(self, c: np.ndarray, n: int, bandwidth: int):
        self.c = c
        self.n = n
        self.bandwidth = bandwidth
        self.c.setflags(write=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        b = np.asarray(rhs, dtype=float)
        if b.shape[0] != self.n:
            raise ValueError("right-hand side has wrong length")
        x, info = lapack.dpbtrs(self.c, b)
        if info != 0:
            raise ValueError(f"dpbtrs failed with info={info}")
        return x


def banded_cholesky_factor(A: BandedMatrix, context: str = "") -> BandedCholesky:
    """Factor a symmetric positive definite :class:`BandedMatrix` without pivoting.

    Only the diagonal and super-diagonals are read.

    Raises
    ------
    SingularMatrixError
        If the matrix is not positive definite (``pivot`` is the failing row).
    """
    ab = np.ascontiguousarray(A.data[: A.upper + 1])
    c, info = lapack.dpbtrf(ab)
    if info > 0:
        raise SingularMatrixError(info - 1, (context + ": " if context else "") + "not positive definite")
    if info < 0:
        raise ValueError(f"dpbtrf: illegal argument {-info}")
    return BandedCholesky(c, A.n, A.upper)


def banded_product(A: BandedMatrix, B: BandedMatrix) -> BandedMatrix:
    """Exact product ``A @ B``; bandwidths add."""
    if A.n != B.n:
        raise ValueError("size mismatch")
    n = A.n
    C = BandedMatrix(n, A.lower + B.lower, A.upper + B.upper)
    acc = {r: np.zeros(n - abs(r)) for r in range(-C.lower, C.upper + 1)}
    for p in range(-A.lower, A.upper + 1):
        a = A.diagonal(p)
        rows = np.arange(a.size) + max(0, -p)  # row i of each A[i, i+p]
        cols = rows + p
        for q in range(-B.lower, B.upper + 1):
            r = p + q
            if abs(r) >= n:
                continue
            # C[i, i+r] += A[i, i+p] * B[i+p, i+p+q]
            ok = (cols + q >= 0) & (cols + q < n)
            b = B.diagonal(q)[(cols + min(q, 0))[ok]]
            acc[r][rows[ok] + min(r, 0)] += a[ok] * b
    for r, vals in acc.items():
        C.set_diagonal(r, vals)
    return C


def fft_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Linear convolution of two real sequences via zero-padded real FFTs.

    Both inputs are padded to the next power of two >= ``len(a) + len(b) - 1`` so the
    circular product equals the linear one. Extra axes of ``b`` are convolved
    independently along axis 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n_out = a.shape[0] + b.shape[0] - 1
    nfft = 1 << max(0, (n_out - 1).bit_length())
    fa = np.fft.rfft(a, nfft, axis=0)
    fb = np.fft.rfft(b, nfft, axis=0)
    if fb.ndim > 1:
        fa = fa.reshape(fa.shape + (1,) * (fb.ndim - 1))
    return np.fft.irfft(fa * fb, nfft, axis=0)[:n_out]
