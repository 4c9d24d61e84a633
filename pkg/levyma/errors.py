"""Exception and warning types raised across levyma.

Errors derive from :class:`LevymaError` and from the builtin they refine, so
callers may catch either. Warnings are emitted with :func:`warnings.warn` for
numerical diagnostics that do not invalidate a result.
"""


class LevymaError(Exception):
    """Base class for all levyma errors."""


class ConfigError(LevymaError, ValueError):
    """Invalid configuration or user input.

    Attributes:
        key: Dotted path of the offending configuration key, if known.
        line: Line number in the configuration file, if known.
    """

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line

    def details(self):
        return {"key": self.key, "line": self.line}


class DomainError(LevymaError, ValueError):
    """A function was evaluated outside its domain."""


class ShapeError(LevymaError, ValueError):
    """Grids or arrays that must be aligned are not."""


class NumericError(LevymaError, ArithmeticError):
    """A numerical routine produced a non-finite or invalid result."""


class PrecisionError(NumericError):
    """A truncated integral misses its tolerance.

    Attributes:
        bound: The estimated truncation error.
        tolerance: The tolerance it was compared against.
    """

    def __init__(self, message, bound=None, tolerance=None):
        super().__init__(message)
        self.bound = bound
        self.tolerance = tolerance

    def details(self):
        return {"bound": self.bound, "tolerance": self.tolerance}


class ExtrapolationError(NumericError):
    """Evaluation points fell outside a precomputed grid.

    Attributes:
        count: Number of offending points.
    """

    def __init__(self, message, count=0):
        super().__init__(message)
        self.count = count

    def details(self):
        return {"count": self.count}


class IntegrityError(NumericError):
    """Two routes to the same quantity disagree beyond tolerance."""

    def __init__(self, message, gap=None, tolerance=None):
        super().__init__(message)
        self.gap = gap
        self.tolerance = tolerance

    def details(self):
        return {"gap": self.gap, "tolerance": self.tolerance}


class NumericWarning(UserWarning):
    """Base category for numerical diagnostics."""


class DecayWarning(NumericWarning):
    """Sampled function does not decay at the grid ends."""


class TruncationWarning(NumericWarning):
    """Mass was dropped when resampling onto a bounded grid."""


class CutoffWarning(NumericWarning):
    """Multiplier nodes were zeroed because the symbol vanished."""


class ClampWarning(NumericWarning):
    """A negative variance estimate was clamped to zero."""


class InconclusiveWarning(NumericWarning):
    """A truncated condition check shows no clear trend."""
