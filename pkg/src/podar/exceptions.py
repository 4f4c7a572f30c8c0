"""Exception types raised across the package."""


class PodarError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(PodarError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateGeometryError(InvalidInputError):
    """Two bodies share a center at the current instant, so the approach
    direction is undefined."""


class NormalizationError(PodarError, ValueError):
    """A signal set cannot be normalized because its maximum is zero."""


class SignalParseError(PodarError, ValueError):
    """A signal or config file is malformed.

    ``row`` is the 1-based line number in the source file when known.
    """

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class OptimizationError(PodarError, RuntimeError):
    """Calibration diverged. ``trace`` holds the loss values seen so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = [] if trace is None else list(trace)
