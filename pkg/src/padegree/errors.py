"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class UnsupportedParametersError(ValueError):
    """The parameter combination is outside the family this package evaluates."""


class ConvergenceError(RuntimeError):
    """A numerical integration or root search did not reach its tolerance."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed the configured size guard."""


class ConsistencyError(RuntimeError):
    """An internal normalization or identity check failed."""
