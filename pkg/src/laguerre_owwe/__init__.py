"""Laguerre-transform solvers for the one-way wave equation.

Modules
-------
laguerre     Laguerre functions, transforms in time, running-sum accumulators
splines      natural odd-degree splines and spline filtration
stability    Von Neumann analysis of the 1D schemes
schemes1d    multistep and one-step marches for the 1D model problem
analytic1d   exact coefficients by a double Laguerre transform
numkernels   banded matrices, LU and Cholesky factorizations, FFT convolution
solver2d     2D depth continuation (Adams-Moulton and predictor-corrector)
experiments  reference setups used by the command line and the tests
"""
from .analytic1d import ExactSolverConfig, exact_coefficients, exact_field
from .laguerre import (
    LaguerreParams,
    LaguerreSeries,
    PhiAccumulator,
    forward_transform,
    inverse_transform,
    laguerre_functions,
    select_eta,
)
from .schemes1d import InstabilityError, Mesh1D, SchemeSpec, Solution1D, energy_profile, l2_error, solve_1d
from .stability import StabilityReport, amplification_factor, classify
from .wavelet import SourceWavelet

__version__ = "0.1.0"

__all__ = [
    "ExactSolverConfig",
    "InstabilityError",
    "LaguerreParams",
    "LaguerreSeries",
    "Mesh1D",
    "PhiAccumulator",
    "SchemeSpec",
    "Solution1D",
    "SourceWavelet",
    "StabilityReport",
    "amplification_factor",
    "classify",
    "energy_profile",
    "exact_coefficients",
    "exact_field",
    "forward_transform",
    "inverse_transform",
    "l2_error",
    "laguerre_functions",
    "select_eta",
    "solve_1d",
]
