"""Exception hierarchy shared across the pipeline.

Each class maps to one CLI exit code so stage failures are distinguishable
from the shell: config problems (2), bad input files (3), numeric failures (4).
"""


class EegTdaError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(EegTdaError):
    """Invalid configuration or parameter combination."""

    exit_code = 2


class InputError(EegTdaError):
    """Missing or malformed input file / data."""

    exit_code = 3


class NumericError(EegTdaError):
    """Numerically degenerate case (zero variance, undefined statistic, ...)."""

    exit_code = 4
