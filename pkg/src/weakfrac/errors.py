"""Exception hierarchy shared by the library, the service, and the CLI."""


class WeakfracError(Exception):
    """Base class for all library errors."""


class UsageError(WeakfracError, ValueError):
    """Invalid parameters or operator misuse (CLI exit code 2)."""


class InputError(WeakfracError, ValueError):
    """Malformed or non-finite input data (CLI exit code 3)."""


class DomainError(UsageError):
    """Evaluation requested outside an operator's domain of definition."""


class PoleError(DomainError):
    """Gamma function evaluated at a non-positive integer."""


class OverflowRangeError(DomainError):
    """Gamma function argument beyond the double-precision overflow threshold."""


class NonConvergenceError(WeakfracError):
    """Adaptive quadrature failed to reach the requested accuracy (exit code 4).

    Carries the best achieved error estimate so callers can report it.
    """

    def __init__(self, message: str, achieved_error: float | None = None):
        super().__init__(message)
        self.achieved_error = achieved_error


class InsufficientPaddingWarning(UserWarning):
    """Spectral-transform input does not decay at the window boundary."""
