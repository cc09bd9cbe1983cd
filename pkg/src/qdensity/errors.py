"""Exception types shared across the package.

Every error carries a stable ``code`` string so the command line tool can
report failures in a machine-readable way. The classes also subclass the
matching builtin (ValueError / RuntimeError) so library callers can catch
them idiomatically.
"""


class QdensityError(Exception):
    """Base class for all package errors."""

    code = "error"


class InvalidInputError(QdensityError, ValueError):
    """Input data violates a documented precondition."""

    code = "invalid-input"


class InvalidConfigError(QdensityError, ValueError):
    """A configuration value is out of its allowed range."""

    code = "invalid-config"


class UnreachableQuantileError(QdensityError, ValueError):
    """The fitted CDF never reaches the requested level (insufficient follow-up)."""

    code = "unreachable-quantile"


class DegenerateWeightError(QdensityError, ValueError):
    """A censoring-survival weight is zero at an observed event time."""

    code = "degenerate-weight"


class SelectionFailureError(QdensityError, RuntimeError):
    """No admissible candidate found during a model-selection scan."""

    code = "selection-failure"


class CalibrationError(QdensityError, RuntimeError):
    """Censoring-rate calibration failed to bracket a root."""

    code = "calibration-failure"


class ParseError(QdensityError, ValueError):
    """A data or config file could not be parsed."""

    code = "parse-error"
