"""Exception hierarchy shared by the solvers and the command line front end."""

from __future__ import annotations


class VolterraError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(VolterraError, ValueError):
    """Inputs violate a documented precondition (shape, dimension, range)."""


class DomainError(VolterraError, ValueError):
    """A series or integrand was evaluated outside its domain."""


class UnsupportedError(VolterraError, ValueError):
    """The requested method does not apply to this class of problem."""


class StructureError(VolterraError):
    """A first-kind kernel lacks the structure needed for a recursive solution."""


class InconsistencyError(VolterraError):
    """The forcing term violates a necessary condition for solvability."""


class StepFailureError(VolterraError):
    """Fixed-point iteration in the time-stepping oracle did not converge."""

    def __init__(self, message: str, node: int):
        super().__init__(message)
        self.node = node


class ProblemFormatError(VolterraError, ValueError):
    """A problem file could not be parsed or failed validation."""
