"""Exception types shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 1,
NumericalError -> 2, GuardError -> 3.
"""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class GuardError(RuntimeError):
    """A feasibility guard (problem size) was violated."""


class NumericalError(RuntimeError):
    """Integration failure: step underflow, NaNs, or a strict-mode violation."""
