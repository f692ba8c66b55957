"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 1,
DataError -> 2, NumericError -> 3.
"""


class ConfigError(Exception):
    """Invalid experiment configuration (unknown field, bad value, missing seed)."""


class DataError(Exception):
    """Dataset contract violation (missing file, bad cell, label out of range)."""


class NumericError(Exception):
    """Numeric failure during training (non-finite loss)."""
