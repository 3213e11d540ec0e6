"""Exception hierarchy shared by all matineq modules."""

from __future__ import annotations


class MatIneqError(Exception):
    """Base class for every error raised by matineq."""


class DimensionError(MatIneqError, ValueError):
    """Operands have incompatible shapes."""


class DomainError(MatIneqError, ValueError):
    """An input lies outside the domain of an operation (e.g. not PSD)."""


class NumericalFailure(MatIneqError, ArithmeticError):
    """A kernel failed to converge or produced an out-of-tolerance residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class DegenerateInstance(MatIneqError):
    """Instance cannot be processed (e.g. sigma_r(AB) vanishes); callers skip or perturb."""
