"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CatboundError(Exception):
    """Base class for all errors raised by the package."""


class InvalidSpecError(CatboundError, ValueError):
    """A space specification or configuration violates its invariants."""


class InvalidParamsError(CatboundError, ValueError):
    """Metric parameters are out of their admissible range."""


class PointSpaceMismatch(CatboundError, TypeError):
    """A point or boundary point does not belong to the given space."""


class HorizonExceeded(CatboundError):
    """A requested evaluation lies beyond the truncation horizon."""


class HorizonUndecidable(CatboundError):
    """A root could not be bracketed inside the truncation horizon."""


class NotHyperbolic(CatboundError):
    """A hyperbolic-only operation was called on a space without a delta."""


class NotInNet(CatboundError, KeyError):
    """A boundary point was expected to be a member of the given net."""


class DomainError(CatboundError, ValueError):
    """An argument lies outside the domain of a closed-form function."""


class InsufficientColors(CatboundError):
    """Greedy coloring ran out of colors.

    ``point`` is the net index of the seed that could not be colored.
    """

    def __init__(self, message: str, point: int):
        super().__init__(message)
        self.point = point


class ResolutionError(CatboundError, ValueError):
    """A discretization resolution or scale is incompatible with the input."""
