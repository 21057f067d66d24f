"""Analytical squeezing-RWA solver and exact oracle for the anisotropic Rabi model."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    CrossCheckWarning,
    DegenerateDenominator,
    IncompleteBasis,
    NumericalError,
    TruncationError,
    TruncationWarning,
)
from .fock import FockTruncation, ModelParams  # noqa: E402
from .gsrwa import VariationalParams, variational_params  # noqa: E402

__all__ = [
    "ConvergenceError",
    "CrossCheckWarning",
    "DegenerateDenominator",
    "FockTruncation",
    "IncompleteBasis",
    "ModelParams",
    "NumericalError",
    "TruncationError",
    "TruncationWarning",
    "VariationalParams",
    "variational_params",
]
