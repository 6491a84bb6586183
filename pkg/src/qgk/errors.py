"""Exception types shared across the package.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``DataError`` -> 3,
``NumericalError`` -> 4.
"""


class QgkError(Exception):
    pass


class ConfigError(QgkError, ValueError):
    """Malformed run configuration, chromosome or backend file."""


class DataError(QgkError, ValueError):
    """Unusable input data (missing file, bad cells, single class...)."""


class NumericalError(QgkError, ArithmeticError):
    """Non-finite values or solver failure."""
