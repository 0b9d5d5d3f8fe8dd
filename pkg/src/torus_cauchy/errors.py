"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class TorusCauchyError(Exception):
    """Base class for all package errors."""


class OutOfHorizon(TorusCauchyError, ValueError):
    """A time argument lies outside ``[0, T]``."""


class QuadratureFailure(TorusCauchyError, RuntimeError):
    """Adaptive quadrature could not meet its tolerance within the node budget."""


class NonVanishing(TorusCauchyError, ValueError):
    """A coefficient does not vanish at the point where a zero was claimed."""


class IllConditioned(TorusCauchyError, ArithmeticError):
    """Sample values underflowed; the requested estimate is meaningless."""


class OverflowGuard(TorusCauchyError, OverflowError):
    """A log-domain value is too large to convert to an ordinary float."""


class StepsTooCoarse(UserWarning):
    """Halving the RK4 step changed the oracle result by more than the advisory bound."""


class InsufficientData(TorusCauchyError, ValueError):
    """Too few nonzero magnitudes to fit a decay model."""


class Unclassifiable(TorusCauchyError):
    """The declared structure lies outside every characterization that is known."""


class MalformedStructure(TorusCauchyError, ValueError):
    """A structure or spec declaration is internally inconsistent."""


class NotInK(TorusCauchyError, ValueError):
    """A degenerate point was passed to a witness builder but does not trigger ill-posedness."""


class BadLadder(TorusCauchyError, ValueError):
    """The ladder parameter lies outside the window where the extremal function increases."""


class SchemaError(TorusCauchyError, ValueError):
    """A problem-spec document failed validation."""
