class ConfigurationError(ValueError):
    """Malformed tables, unknown variable names, failed model validation."""


class UsageError(ValueError):
    """A call that violates an operation's preconditions."""


class Infeasible(RuntimeError):
    """No test channel (or grid point) satisfies the cost/distortion budget."""


class OracleBudgetExceeded(RuntimeError):
    """Brute-force enumeration would exceed the configured channel count."""

    def __init__(self, count, cap):
        super().__init__(
            f"brute-force enumeration needs {count} channels, cap is {cap}")
        self.count = count
        self.cap = cap


class RowCapExceeded(RuntimeError):
    """Fourier-Motzkin elimination would exceed the intermediate row cap."""
