"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or instance invariant."""


class InfeasibleError(RuntimeError):
    """No feasible object exists for the requested configuration."""


class InitializationError(RuntimeError):
    """A population stratum could not be filled within the resample budget."""


class OracleLimitError(RuntimeError):
    """Brute-force enumeration refused because the search space is too large."""

    def __init__(self, size, limit):
        super().__init__(f"strategy space has {size} elements, limit is {limit}")
        self.size = size
        self.limit = limit
