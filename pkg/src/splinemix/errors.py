"""Exception hierarchy shared across the package.

Each class maps to a CLI exit code: configuration problems exit 2, data
problems exit 3, numerical failures exit 4.
"""


class SplinemixError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(SplinemixError):
    """Invalid configuration: bad keys, out-of-range settings."""

    exit_code = 2


class DataError(SplinemixError):
    """Invalid input data: bad grids, non-finite values, shape mismatches."""

    exit_code = 3


class NumericalError(SplinemixError):
    """Numerical failure: factorization breakdown, degenerate densities."""

    exit_code = 4
