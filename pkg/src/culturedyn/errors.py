"""Exception hierarchy.

Validation problems derive from :class:`ValueError`, numerical failures from
:class:`ArithmeticError`, so callers that only care about the broad category
can catch the builtin.
"""

from __future__ import annotations


class CultureDynError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CultureDynError, ValueError):
    """An input violates a documented invariant.

    ``field`` names the offending field when there is one.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ScenarioParseError(ValidationError):
    """A scenario document could not be parsed. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, field=field)
        self.line = line


class NumericalError(CultureDynError, ArithmeticError):
    """Base for failures of the numerical machinery."""


class DivergenceError(NumericalError):
    """The integration produced a non-finite state.

    ``trajectory`` holds every sample recorded before the blow-up.
    """

    def __init__(self, time: float, trajectory=None):
        super().__init__(f"divergence at t = {time:.6g}")
        self.time = time
        self.trajectory = trajectory


class ConvergenceError(NumericalError):
    """Step refinement did not reach the requested tolerance."""


class FigureReproductionError(NumericalError):
    """A figure preset did not land in its expected regime."""

    def __init__(self, message: str, reports=()):
        super().__init__(message)
        self.reports = tuple(reports)
