"""Exception types shared across the package."""


class CombError(Exception):
    """Base class for all package errors."""


class DomainError(CombError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergentSeriesError(DomainError):
    """A Conway-Maxwell-Poisson normalizing series does not converge."""


class CapExceededError(CombError):
    """A configured resource cap (series terms, compositions) was exceeded."""

    def __init__(self, message, size=None):
        super().__init__(message)
        self.size = size


class NumericError(CombError, ArithmeticError):
    """A computation produced a non-finite value."""


class OptimizationError(CombError):
    """Newton iteration failed to converge; ``trace`` holds the iterates."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)
