"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SGError(Exception):
    """Base class for every error raised by the package."""


class DomainError(SGError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegeneracyError(SGError, ArithmeticError):
    """An affine system or recurrence has no unique solution."""

    def __init__(self, message: str, j: int | None = None, r: object = None):
        super().__init__(message)
        self.j = j
        self.r = r


class PrecisionError(DegeneracyError):
    """A float-backend pivot fell below the safety threshold."""


class DepthError(SGError, ValueError):
    """A monomial table is shallower than the polynomial degree requires."""


class MissingValueError(SGError, KeyError):
    """A mesh lacks a value needed by a stencil."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class RootNotFoundError(SGError, ArithmeticError):
    """No sign change was found while inverting the decimation map."""


class ConvergenceError(SGError, ArithmeticError):
    """An iteration did not converge within its budget."""

    def __init__(self, message: str, trajectory: object = None):
        super().__init__(message)
        self.trajectory = trajectory
