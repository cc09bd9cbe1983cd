"""Input validation helpers.

Small checks shared by the public entry points (estimators, CLI, library
functions). They normalize user input to numpy arrays and raise
:class:`~qdensity.errors.InvalidInputError` / ``InvalidConfigError`` with a
message naming the offending argument.
"""

from __future__ import annotations

import numbers

import numpy as np

from .errors import InvalidConfigError, InvalidInputError


def check_time_event(time, event, require_positive: bool = True):
    """Validate paired observation times and event indicators.

    Parameters
    ----------
    time : array-like of shape (n,)
        Observed times (event or censoring). Must be finite; strictly
        positive unless ``require_positive`` is False.
    event : array-like of shape (n,)
        Event indicators, coercible to bool (1 = event observed,
        0 = right-censored).
    require_positive : bool
        Relax the positivity requirement (for survival models supported
        on the whole real line).

    Returns
    -------
    (ndarray, ndarray)
        Float times and bool indicators, same length, unsorted.
    """
    t = np.asarray(time, dtype=float)
    e = np.asarray(event)
    if t.ndim != 1 or e.ndim != 1:
        raise InvalidInputError("time and event must be one-dimensional")
    if t.shape[0] != e.shape[0]:
        raise InvalidInputError(
            f"time and event lengths differ ({t.shape[0]} vs {e.shape[0]})"
        )
    if t.shape[0] == 0:
        raise InvalidInputError("need at least one observation")
    if not np.all(np.isfinite(t)):
        raise InvalidInputError("all times must be finite")
    if require_positive and not np.all(t > 0):
        raise InvalidInputError("all times must be > 0")
    if e.dtype != bool:
        uniq = np.unique(e)
        if not np.all(np.isin(uniq, [0, 1, False, True])):
            raise InvalidInputError("event indicators must be 0/1 or boolean")
        e = e.astype(bool)
    return t, e


def check_open_unit(value, name: str) -> float:
    """Require ``value`` to lie strictly inside (0, 1)."""
    if not isinstance(value, numbers.Real) or not 0.0 < float(value) < 1.0:
        raise InvalidInputError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_positive(value, name: str) -> float:
    """Require a finite, strictly positive real."""
    if not isinstance(value, numbers.Real):
        raise InvalidConfigError(f"{name} must be a positive real, got {value!r}")
    v = float(value)
    if not np.isfinite(v) or v <= 0.0:
        raise InvalidConfigError(f"{name} must be finite and > 0, got {value!r}")
    return v


def check_count(value, name: str, minimum: int = 1) -> int:
    """Require an integer >= ``minimum``."""
    if not isinstance(value, numbers.Integral):
        raise InvalidConfigError(f"{name} must be an integer, got {value!r}")
    v = int(value)
    if v < minimum:
        raise InvalidConfigError(f"{name} must be >= {minimum}, got {v}")
    return v
