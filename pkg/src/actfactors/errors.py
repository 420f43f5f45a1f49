"""Exception taxonomy shared across the package.

Two branches matter for the CLI: ConfigError maps to exit code 2,
DataError (and subclasses) to exit code 3.
"""


class ActFactorsError(Exception):
    """Base class for all package errors."""


class ConfigError(ActFactorsError):
    """Invalid parameters or parameter combinations."""


class DataError(ActFactorsError):
    """Input data violates a contract (shape, finiteness, rank, ...)."""


class DimensionError(DataError):
    """Matrix has too few rows/columns for the requested operation."""


class ZeroVarianceSeries(DataError):
    """A series has (numerically) zero variance and cannot be standardized."""

    def __init__(self, column: int, message: str | None = None):
        self.column = column  # 1-based
        super().__init__(message or f"series in column {column} has zero variance")


class ParseError(DataError):
    """Malformed CSV input; message carries row/column location."""


class DegenerateGap(ActFactorsError):
    """Two adjacent eigenvalues are tied where a strict gap is required."""


class PoleAtZ(ActFactorsError):
    """Evaluation point of a partial Stieltjes transform hits a pole."""


class NumericalDomain(ActFactorsError):
    """A criterion hit an invalid numerical domain (log of <= 0, 0 denominator)."""


class SupportViolation(ActFactorsError):
    """Evaluation point lies inside the support of a spectral law."""


class SeparationError(ActFactorsError):
    """Spike is not separated from the bulk; the spike map does not apply."""
