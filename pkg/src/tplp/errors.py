"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid input data or configuration."""


class NumericalError(RuntimeError):
    """A numerical routine failed or produced an untrustworthy result."""


class CapExceededError(ValidationError):
    """A dense/diagnostic operation was asked to exceed its size cap."""
