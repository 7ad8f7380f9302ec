"""Odd-degree interpolating splines with natural end conditions, and spline filtration.

A spline of degree ``2p - 1`` is "natural" when derivatives ``p .. 2p - 2`` vanish at
both ends (cubic: ``f'' = 0``; quintic: ``f''' = f'''' = 0``; septic: orders 4-6).
Coefficients are found by B-spline collocation; the collocation matrix is banded and
factored with :mod:`laguerre_owwe.numkernels`.

Filtration replaces every other grid value by the spline through the remaining
ones. On a uniform grid the map is a fixed linear operator, so its factorization is
cached per (length, degree).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.interpolate import BSpline, PPoly

from .numkernels import BandedMatrix

DEGREES = (3, 5, 7)


def _natural_orders(degree: int) -> list[int]:
    p = (degree + 1) // 2
    return list(range(p, 2 * p - 1))


def _knots(xs: np.ndarray, degree: int) -> np.ndarray:
    return np.concatenate([np.repeat(xs[0], degree + 1), xs[1:-1], np.repeat(xs[-1], degree + 1)])


def _collocation(xs: np.ndarray, degree: int) -> BandedMatrix:
    t = _knots(xs, degree)
    ncoef = len(t) - degree - 1
    orders = _natural_orders(degree)
    basis = BSpline(t, np.eye(ncoef), degree, extrapolate=False)
    rows = [basis.derivative(nu)(xs[0]) for nu in orders]
    rows.append(BSpline.design_matrix(xs, t, degree).toarray())
    rows += [basis.derivative(nu)(xs[-1]) for nu in orders]
    a = np.vstack(rows)
    i, j = np.nonzero(a)
    lower = int(max(0, (i - j).max()))
    upper = int(max(0, (j - i).max()))
    return BandedMatrix.from_dense(a, lower, upper)


class SplineFit:
    """Interpolating spline of degree 3, 5 or 7 (callable; ``nu`` selects a derivative)."""

    def __init__(self, xs: np.ndarray, coeffs: np.ndarray, degree: int):
        self.degree = degree
        self.knots = np.asarray(xs, dtype=float)
        self._bspline = BSpline(_knots(self.knots, degree), coeffs, degree)

    def __call__(self, x, nu: int = 0) -> np.ndarray:
        return self._bspline(x, nu=nu)

    def to_ppoly(self) -> PPoly:
        """Piecewise-polynomial (power basis) form, one piece per knot interval."""
        return PPoly.from_spline(self._bspline)


def _check_nodes(xs: np.ndarray, degree: int) -> None:
    if degree not in DEGREES:
        raise ValueError(f"degree must be one of {DEGREES}, got {degree}")
    if xs.ndim != 1:
        raise ValueError("nodes must be one-dimensional")
    if xs.size < degree + 1:
        raise ValueError(f"need at least {degree + 1} nodes for degree {degree}")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("nodes must be strictly increasing")


def fit_spline(xs, ys, degree: int = 5) -> SplineFit:
    """Natural interpolating spline through ``(xs, ys)``; ``ys`` may have trailing axes."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    _check_nodes(xs, degree)
    if ys.shape[0] != xs.size:
        raise ValueError("xs and ys lengths differ")
    A = _collocation(xs, degree)
    n_end = len(_natural_orders(degree))
    rhs = np.zeros((A.n,) + ys.shape[1:])
    rhs[n_end: n_end + xs.size] = ys
    coeffs = A.factor("spline collocation").solve(rhs)
    return SplineFit(xs, coeffs, degree)


class UniformSplineOperator:
    """Cached linear map from values on ``0..n_nodes-1`` to spline values at ``targets``.

    Positions are in units of the node spacing.
    """

    def __init__(self, n_nodes: int, degree: int, targets):
        xs = np.arange(n_nodes, dtype=float)
        _check_nodes(xs, degree)
        self.n_nodes = n_nodes
        self.degree = degree
        self.targets = np.asarray(targets, dtype=float)
        if np.any(self.targets < 0) or np.any(self.targets > n_nodes - 1):
            raise ValueError("targets must lie inside the node range")
        self._lu = _collocation(xs, degree).factor("spline collocation")
        self._n_end = len(_natural_orders(degree))
        self._eval = BSpline.design_matrix(self.targets, _knots(xs, degree), degree).tocsr()

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Interpolate along axis 0; trailing axes are independent columns."""
        values = np.asarray(values, dtype=float)
        rhs = np.zeros((self._lu.n,) + values.shape[1:])
        rhs[self._n_end: self._n_end + self.n_nodes] = values
        coeffs = self._lu.solve(rhs.reshape(self._lu.n, -1))
        out = self._eval @ coeffs
        return out.reshape(self.targets.shape + values.shape[1:])


@lru_cache(maxsize=64)
def uniform_operator(n_nodes: int, degree: int, targets: tuple) -> UniformSplineOperator:
    return UniformSplineOperator(n_nodes, degree, np.array(targets))


@lru_cache(maxsize=64)
def _filter_operator(n: int, degree: int) -> UniformSplineOperator:
    n_kept = (n + 1) // 2
    return UniformSplineOperator(n_kept, degree, np.arange(n_kept - 1) + 0.5)


def spline_filter(values, degree: int = 5, axis: int = 0) -> np.ndarray:
    """Replace odd-indexed entries by the spline through the even-indexed ones.

    Indices ``0, 2, 4, ...`` (including both ends) are kept unchanged; ``values``
    must have odd length along ``axis``, at least 7 and enough retained nodes for
    the requested degree.
    """
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = v.shape[0]
    if n % 2 == 0:
        raise ValueError(f"filtration needs an odd number of nodes, got {n}")
    if n < 7:
        raise ValueError("filtration needs at least 7 nodes")
    op = _filter_operator(n, degree)
    out = v.copy()
    out[1::2] = op(v[0::2])
    return np.moveaxis(out, 0, axis)


def midpoint_values(values, degree: int = 5) -> np.ndarray:
    """Spline values halfway between consecutive uniform nodes (axis 0)."""
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    return uniform_operator(n, degree, tuple(np.arange(n - 1) + 0.5))(v)


def refine(values, factor: int, degree: int = 3) -> np.ndarray:
    """Spline-interpolate uniform-grid values onto a grid ``factor`` times finer (axis 0)."""
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    fine = np.arange((n - 1) * factor + 1) / factor
    out = uniform_operator(n, degree, tuple(fine))(v)
    out[::factor] = v
    return out
