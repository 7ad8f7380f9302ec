"""Von Neumann analysis of the Laguerre-domain schemes under periodic conditions in x.

Substituting ``v^m_j = G^m exp(i j theta)`` into a scheme for
``(eta/2 + c d/dx) v^m + Phi_1(v^m) = 0`` and eliminating ``Phi_1`` with
``Phi_1(v^m) = Phi_1(v^{m-1}) + eta v^{m-1}`` gives a characteristic polynomial in
``G``; a scheme is stable when its largest root stays inside the unit circle for
every ``theta``. Only ``beta = eta h_x / (2 c)`` and the x-stencil matter, so a
negative ``beta`` describes flow with ``c < 0``.

For every scheme handled here the x-stencil enters linearly and the polynomial is of
degree one, ``(e - 1 + beta S) G - (e - 1 - beta S) = 0`` with ``e = exp(i theta)``
and ``S`` the Fourier symbol of the stencil weights. The roots are still found from
the polynomial so that the same path serves any future scheme.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schemes1d import SchemeSpec

NEUTRAL_BAND = 1e-12


@dataclass(frozen=True)
class StabilityReport:
    scheme: SchemeSpec
    beta: float
    samples: np.ndarray  # (n, 2): theta, |G|
    max_abs_g: float
    classification: str


def _resolve(scheme) -> SchemeSpec:
    return SchemeSpec.preset(scheme) if isinstance(scheme, str) else scheme


def _offsets(spec: SchemeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Stencil offsets and weights of the right-hand-side average."""
    if spec.method == "forward1":
        return np.array([0]), np.array([1.0])
    if spec.method == "backward1":
        return np.array([1]), np.array([1.0])
    if spec.method == "cn":
        return np.array([0, 1]), np.array([0.5, 0.5])
    w = np.array([float(a) for a in spec.weights])
    last = 1 if spec.method == "adams_moulton" else 0
    return np.arange(last - w.size + 1, last + 1), w


def characteristic_polynomial(scheme, beta: float, theta: float) -> np.ndarray:
    """Coefficients (highest power first) of the polynomial whose roots are ``G``."""
    spec = _resolve(scheme)
    if spec.method in ("rk4", "richardson_cn"):
        raise ValueError(f"no closed-form symbol for {spec.name}")
    if spec.filter_degree is not None:
        # filtration is not translation invariant; analyse the bare stencil
        spec = SchemeSpec(spec.name, spec.method, spec.weights, None, spec.phi_stencil)
    off, w = _offsets(spec)
    S = np.sum(w * np.exp(1j * off * theta))
    e1 = np.exp(1j * theta) - 1.0
    if spec.phi_stencil is not None:
        # Phi_1(v^m) = (eta/2 - c D) v^{m-1}; D has symbol d/h
        st = np.array([float(a) for a in spec.phi_stencil])
        r = st.size // 2
        d = np.sum(st * np.exp(1j * np.arange(-r, r + 1) * theta))
        return np.array([e1 + beta * S, S * (beta - d)])
    return np.array([e1 + beta * S, -(e1 - beta * S)])


def amplification_factor(scheme, beta: float, theta: float) -> complex:
    """Largest-modulus growth factor per Laguerre index for the Fourier mode ``theta``.

    Parameters
    ----------
    scheme : SchemeSpec or str
        Scheme or preset name (``Forward1``, ``Backward1``, ``CN``, ``AM3`` ..
        ``AM6``, ``AB5``, ``AM5-D4`` ...). Spline filtration is ignored.
    beta : float
        ``eta h_x / (2 c)``; negative for ``c < 0``.
    theta : float
        ``k_x h_x``.

    Raises
    ------
    ValueError
        If ``beta`` is zero or the leading coefficient vanishes.
    """
    if beta == 0 or not np.isfinite(beta):
        raise ValueError("beta must be finite and non-zero")
    poly = characteristic_polynomial(scheme, beta, theta)
    if abs(poly[0]) < 1e-300 * max(1.0, np.max(np.abs(poly))):
        raise ValueError(f"degenerate characteristic polynomial at theta={theta}")
    roots = np.roots(poly)
    return complex(roots[np.argmax(np.abs(roots))])


def classify(scheme, beta: float, n_samples: int = 256) -> StabilityReport:
    """Sample ``|G|`` on ``theta = 2 pi k / n_samples`` and classify the scheme."""
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    spec = _resolve(scheme)
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    g = np.array([abs(amplification_factor(spec, beta, th)) for th in theta])
    gmax = float(g.max())
    if gmax > 1.0 + NEUTRAL_BAND:
        label = "unstable"
    elif g.min() >= 1.0 - NEUTRAL_BAND:
        label = "neutrally_stable"
    else:
        label = "stable"
    return StabilityReport(spec, float(beta), np.column_stack([theta, g]), gmax, label)


def first_order_sign(scheme, beta: float, theta) -> np.ndarray:
    """Closed-form ``A - B`` for the two first-order schemes (same sign as ``|G|^2 - 1``)."""
    spec = _resolve(scheme)
    theta = np.asarray(theta, dtype=float)
    if spec.method == "forward1":
        return 4.0 * beta * (1.0 - np.cos(theta))
    if spec.method == "backward1":
        return 4.0 * beta * (np.cos(theta) - 1.0)
    raise ValueError("closed form only for Forward1 and Backward1")
