"""2D one-way depth extrapolation in the Laguerre domain."""
from .extrapolate import (
    DepthExtrapolator,
    Extrapolation2DResult,
    RateRing,
    StabilityWarning,
    WavefieldState2D,
    filter_phi_fields,
)
from .gridio import read_grid, read_model, read_seismogram, write_grid, write_model, write_seismogram
from .migrate import MigrationResult, envelope_peak_depth, flat_reflector_section, migrate
from .model import (
    VelocityModel2D,
    constant_model,
    smooth_velocity,
    syncline_model,
    two_layer_model,
)
from .operators import DrpStencil, PadeCoefficients, RowOperators, assemble_reduced, drp_apply, drp_matrix

__all__ = [
    "DepthExtrapolator",
    "DrpStencil",
    "MigrationResult",
    "Extrapolation2DResult",
    "PadeCoefficients",
    "RateRing",
    "RowOperators",
    "StabilityWarning",
    "VelocityModel2D",
    "WavefieldState2D",
    "assemble_reduced",
    "constant_model",
    "drp_apply",
    "drp_matrix",
    "envelope_peak_depth",
    "filter_phi_fields",
    "flat_reflector_section",
    "migrate",
    "read_grid",
    "read_model",
    "read_seismogram",
    "smooth_velocity",
    "syncline_model",
    "two_layer_model",
    "write_grid",
    "write_model",
    "write_seismogram",
]
