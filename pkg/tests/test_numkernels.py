import numpy as np
import pytest

from laguerre_owwe.numkernels import (
    BandedMatrix,
    SingularMatrixError,
    banded_cholesky_factor,
    banded_lu_factor,
    banded_product,
    banded_solve,
    fft_convolve,
)
from laguerre_owwe.solver2d.operators import DrpStencil, PadeCoefficients, RowOperators


def random_banded(rng, n, lower, upper, shift=0.0):
    a = np.zeros((n, n))
    for p in range(-lower, upper + 1):
        a += np.diag(rng.standard_normal(n - abs(p)), p)
    a += shift * np.eye(n)
    return BandedMatrix.from_dense(a, lower, upper), a


def solve_residual_ok(a, x, b):
    res = np.max(np.abs(a @ x - b))
    return res <= 1e-10 * (np.max(np.abs(a).sum(1)) * np.max(np.abs(x)) + np.max(np.abs(b)))


# -- storage -------------------------------------------------------------------------
def test_dense_round_trip_and_matvec(rng):
    A, a = random_banded(rng, 30, 3, 5)
    np.testing.assert_array_equal(A.to_dense(), a)
    x = rng.standard_normal(30)
    np.testing.assert_allclose(A.matvec(x), a @ x, rtol=1e-13, atol=1e-13)
    X = rng.standard_normal((30, 4))
    np.testing.assert_allclose(A.matvec(X), a @ X, rtol=1e-13, atol=1e-13)


def test_entries_outside_band_are_zero(rng):
    A = BandedMatrix(10, 2, 1, rng.standard_normal((4, 10)))
    d = A.to_dense()
    i, j = np.indices(d.shape)
    assert np.all(d[(i - j > 2) | (j - i > 1)] == 0)
    with pytest.raises(ValueError):
        BandedMatrix(10, 2, 1, np.zeros((3, 10)))


def test_diagonal_access():
    A = BandedMatrix.from_diagonals({-1: [1.0, 2.0], 0: 5.0, 2: [7.0]}, 3)
    np.testing.assert_array_equal(A.to_dense(), [[5, 0, 7], [1, 5, 0], [0, 2, 5]])
    np.testing.assert_array_equal(A.diagonal(-1), [1, 2])


# -- LU ------------------------------------------------------------------------------------
def test_identity_solve_returns_rhs(rng):
    b = rng.standard_normal(7)
    np.testing.assert_array_equal(BandedMatrix.identity(7).factor().solve(b), b)


def test_poisson_ones():
    n = 100
    A = BandedMatrix.from_diagonals({-1: -1.0, 0: 2.0, 1: -1.0}, n)
    rhs = A.matvec(np.ones(n))
    x = banded_solve(banded_lu_factor(A), rhs)
    np.testing.assert_allclose(x, 1.0, atol=1e-12)


def test_random_banded_against_dense_solver(rng):
    A, a = random_banded(rng, 200, 18, 18, shift=4.0)
    b = rng.standard_normal((200, 3))
    x = A.factor().solve(b)
    np.testing.assert_allclose(x, np.linalg.solve(a, b), atol=1e-9)
    assert solve_residual_ok(a, x, b)


def test_pivoting_handles_zero_diagonal():
    a = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    x = BandedMatrix.from_dense(a, 1, 1).factor().solve(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(a @ x, [1, 2, 3], atol=1e-14)


def test_columns_are_independent(rng):
    A, _ = random_banded(rng, 40, 2, 3, shift=3.0)
    lu = A.factor()
    B = rng.standard_normal((40, 5))
    X = lu.solve(B)
    for k in range(5):
        np.testing.assert_allclose(X[:, k], lu.solve(B[:, k]), rtol=1e-14, atol=1e-14)


def test_singular_matrix_reports_pivot():
    a = np.diag([1.0, 2.0, 0.0, 4.0])
    with pytest.raises(SingularMatrixError) as err:
        BandedMatrix.from_dense(a, 1, 1).factor("demo")
    assert err.value.pivot == 2
    assert "demo" in str(err.value)


def test_factor_is_read_only(rng):
    A, _ = random_banded(rng, 10, 1, 1, shift=3.0)
    lu = A.factor()
    with pytest.raises(ValueError):
        lu.lu[0, 0] = 1.0


def test_wrong_rhs_length(rng):
    A, _ = random_banded(rng, 10, 1, 1, shift=3.0)
    with pytest.raises(ValueError):
        A.factor().solve(np.zeros(9))


# -- Cholesky --------------------------------------------------------------------------------
def test_cholesky_matches_dense(rng):
    n, k = 60, 4
    B, b = random_banded(rng, n, k, 0)
    spd = b @ b.T + 0.5 * np.eye(n)
    A = BandedMatrix.from_dense(spd, k, k)
    rhs = rng.standard_normal((n, 2))
    np.testing.assert_allclose(banded_cholesky_factor(A).solve(rhs), np.linalg.solve(spd, rhs), atol=1e-10)


def test_cholesky_rejects_indefinite():
    A = BandedMatrix.from_diagonals({-1: 1.0, 0: 1.0, 1: 1.0}, 5)
    with pytest.raises(SingularMatrixError, match="positive definite"):
        banded_cholesky_factor(A)


# -- products ------------------------------------------------------------------------------
def test_product_with_identity(rng):
    A, a = random_banded(rng, 25, 2, 3)
    C = banded_product(A, BandedMatrix.identity(25))
    np.testing.assert_array_equal(C.to_dense(), a)


def test_product_of_diagonals_is_entrywise(rng):
    d1, d2 = rng.standard_normal(9), rng.standard_normal(9)
    C = banded_product(BandedMatrix.from_diagonals({0: d1}, 9), BandedMatrix.from_diagonals({0: d2}, 9))
    np.testing.assert_allclose(C.diagonal(0), d1 * d2, rtol=1e-15)


def test_product_against_dense_and_band_growth(rng):
    A, a = random_banded(rng, 30, 2, 4)
    B, b = random_banded(rng, 30, 3, 1)
    C = banded_product(A, B)
    assert (C.lower, C.upper) == (5, 5)
    np.testing.assert_allclose(C.to_dense(), a @ b, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose((A @ B).to_dense(), a @ b, rtol=1e-13, atol=1e-13)


def test_pade_factors_commute_for_constant_velocity():
    ops = RowOperators(np.full(64, 250.0), 600.0, PadeCoefficients(), DrpStencil(), 10.0)
    M1, M2 = ops.M[0], ops.M[1]
    diff = (banded_product(M1, M2) - banded_product(M2, M1)).norm_inf()
    assert diff < 1e-12 * M1.norm_inf() * M2.norm_inf()


def test_size_mismatch():
    with pytest.raises(ValueError):
        banded_product(BandedMatrix.identity(3), BandedMatrix.identity(4))


# -- FFT convolution ---------------------------------------------------------------------
def test_convolve_trivial_cases(rng):
    b = rng.standard_normal(17)
    np.testing.assert_allclose(fft_convolve([1.0], b), b, atol=1e-15)
    np.testing.assert_allclose(fft_convolve([1.0, 1.0], [1.0, 1.0]), [1, 2, 1], atol=1e-15)


def test_convolve_against_direct(rng):
    a, b = rng.standard_normal(1000), rng.standard_normal(1000)
    out = fft_convolve(a, b)
    assert out.shape == (1999,)
    np.testing.assert_allclose(out, np.convolve(a, b), atol=1e-10)


def test_convolve_trailing_axes(rng):
    a, b = rng.standard_normal(12), rng.standard_normal((7, 3))
    out = fft_convolve(a, b)
    for k in range(3):
        np.testing.assert_allclose(out[:, k], np.convolve(a, b[:, k]), atol=1e-13)
