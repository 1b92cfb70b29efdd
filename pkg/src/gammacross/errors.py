"""Exception hierarchy shared across the package.

Semantics:
    DomainError       -- inputs outside a routine's documented domain.
    ConvergenceError  -- an iterative scheme hit its cap before meeting tolerance.
    UndecidedError    -- a certification routine cannot answer at the working tolerance.
    SearchExhaustedError -- a parameter search ran out of budget without a verified hit.
"""


class GammaCrossError(Exception):
    """Base class for package errors."""


class DomainError(GammaCrossError, ValueError):
    """Raised when an argument lies outside the documented domain."""


class ConvergenceError(GammaCrossError, RuntimeError):
    """Raised when an iteration cap is reached before the tolerance is met."""


class UndecidedError(GammaCrossError, RuntimeError):
    """Raised when a yes/no certification cannot be made at the working tolerance."""


class SearchExhaustedError(GammaCrossError, RuntimeError):
    """Raised when a bounded search ends without a verified result."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
