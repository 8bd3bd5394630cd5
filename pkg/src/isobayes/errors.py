"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or incomplete configuration."""


class DataError(ValueError):
    """Malformed or out-of-domain input data."""


class StateError(RuntimeError):
    """Operation is undefined for the current state (e.g. no observations)."""


class TableRangeError(ValueError):
    """Query falls outside the support covered by a Z_B table."""
