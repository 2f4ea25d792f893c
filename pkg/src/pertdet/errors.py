"""Exception hierarchy shared by every module of the package."""


class PertdetError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PertdetError, ValueError):
    """Inputs are structurally incompatible (grid mismatch, bad config key)."""


class DomainError(PertdetError, ValueError):
    """A parameter lies outside the domain where the quantity is defined."""


class DivergenceError(PertdetError, ArithmeticError):
    """A series was requested in a regime where it cannot converge."""


class BlowUpError(PertdetError, ArithmeticError):
    """Time integration produced non-finite coefficients.

    ``last_good_time`` holds the last time at which the state was finite.
    """

    def __init__(self, message: str, last_good_time: float):
        super().__init__(message)
        self.last_good_time = last_good_time


class ConsistencyError(PertdetError, RuntimeError):
    """An internal invariant (e.g. reality of a real flow) was violated."""
