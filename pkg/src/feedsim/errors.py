"""Exception types shared across the package.

Each maps to a CLI exit code: ConfigError -> 2, IntegrityError -> 3,
OSError (built-in) -> 4.
"""


class FeedsimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FeedsimError):
    """Invalid configuration: bad value, unknown key, inconsistent fields."""


class IntegrityError(FeedsimError):
    """Internal consistency violation during a run (corrupt state, bad event)."""


class UndefinedStatisticError(FeedsimError):
    """A requested statistic is undefined for the given data (e.g. empty group)."""
