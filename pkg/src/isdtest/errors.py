"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid sample data: empty, negative, non-finite, or a malformed file."""


class ConfigError(ValueError):
    """Invalid configuration: tuning parameters, grids, or scheme mismatches."""
