"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates an operation's precondition."""


class ResourceError(RuntimeError):
    """A configured size cap (group order, exhaustive search) would be exceeded."""


class ConsistencyError(RuntimeError):
    """A runtime self-check failed (e.g. a monotonicity assumption during bisection)."""
