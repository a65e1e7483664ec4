"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, PrecisionError -> 3,
InternalError -> 4. Everything else is a plain ValueError at the API edge.
"""


class RqmcError(Exception):
    """Base class for package-specific failures."""


class ConfigError(RqmcError):
    """Malformed or inconsistent user configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PrecisionError(RqmcError):
    """A reference value is not precise enough for the requested experiment."""


class BudgetError(RqmcError):
    """A tensor-grid or cell-array request exceeds the configured budget."""


class InternalError(RqmcError):
    """An internal invariant was violated; indicates a bug, not bad input."""
