"""Numerical verification of eigenvalue and singular value inequalities for PSD matrix pairs."""

from .errors import DegenerateInstance, DimensionError, DomainError, MatIneqError, NumericalFailure
from .inequalities import PROVEN, T_GRID, InequalityInstance, InequalityResult, run_all
from .linalg import geometric_mean, matrix_power, polar_decompose, psd_sqrt

__version__ = "0.1.0"

__all__ = [
    "DegenerateInstance", "DimensionError", "DomainError", "InequalityInstance", "InequalityResult",
    "MatIneqError", "NumericalFailure", "PROVEN", "T_GRID", "geometric_mean", "matrix_power",
    "polar_decompose", "psd_sqrt", "run_all",
]
