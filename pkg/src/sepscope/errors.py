"""Exception types shared across the package."""


class SepscopeError(Exception):
    """Base class for package-specific failures."""


class DimensionMismatchError(SepscopeError, ValueError):
    """Operands act on incompatible tensor factors."""


class InvalidInputError(SepscopeError, ValueError):
    """Input violates a structural precondition."""


class NumericalFailureError(SepscopeError, RuntimeError):
    """A numerical routine left its certified operating regime."""

    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = state or {}


class BudgetExceededError(SepscopeError, RuntimeError):
    """A brute-force enumeration would exceed its evaluation cap."""
