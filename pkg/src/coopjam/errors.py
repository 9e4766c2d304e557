"""Exception types shared across the package.

Everything derives from CoopJamError so callers can catch library failures
with a single except clause while still seeing ValueError/RuntimeError
semantics from generic code.
"""


class CoopJamError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(CoopJamError, ValueError):
    """Malformed or inconsistent arguments: bad shapes, negative powers, etc."""


class DomainError(CoopJamError, ValueError):
    """Argument outside the mathematical domain of a function."""


class NumericalError(CoopJamError, RuntimeError):
    """A computation produced non-finite values or a solver broke down."""


class AccuracyError(NumericalError):
    """Requested accuracy was not reached.

    The best available estimate is attached so callers can decide whether
    it is still usable.
    """

    def __init__(self, message: str, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class DegeneratePowersError(CoopJamError, ValueError):
    """Transmit powers (or derived poles) too close together for the
    partial-fraction formulas to be well conditioned."""


class ResourceLimitError(CoopJamError, RuntimeError):
    """A combinatorial expansion or iteration budget would be exceeded."""
