class DomainError(ValueError):
    """Input outside the domain of an operation (bad grid, invalid parameter, non-finite value)."""


class SolverError(RuntimeError):
    """A closed-form solver hit a degenerate or numerically unusable configuration."""


class IndefiniteSystemError(SolverError):
    """Discrete stationarity system is not positive definite."""

    def __init__(self, message, pivot):
        super().__init__(message)
        self.pivot = pivot

    @property
    def eigenvalue_sign(self):
        return -1 if self.pivot < 0 else 0


class ConfigError(ValueError):
    """Run configuration failed validation."""
