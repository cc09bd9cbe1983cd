"""Right-censored samples, the Kaplan-Meier CDF, and quantile lookup.

The product-limit survival values are accumulated in exact rational
arithmetic and rounded to float once per jump. This keeps the estimator
bit-identical to the empirical CDF on uncensored data (each CDF value is
the correctly rounded float of an exact ratio), which downstream tests
rely on.

All types are immutable after construction and all operations are pure,
so values can be shared freely across worker processes or threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError, UnreachableQuantileError
from .validation import check_open_unit, check_time_event


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SurvivalSample:
    """A sample of right-censored observations ``(time, event)``.

    Records are stored sorted ascending by time; at tied times, events
    come before censorings. Times must be finite and, unless
    ``require_positive=False`` is passed at construction, strictly
    positive.

    Attributes
    ----------
    times : ndarray of float, shape (n,)
    events : ndarray of bool, shape (n,)
        True where the event was observed, False where censored.
    """

    times: np.ndarray
    events: np.ndarray

    def __init__(self, times, events, require_positive: bool = True):
        t, e = check_time_event(times, events, require_positive=require_positive)
        # Primary key: time ascending. Secondary: events first (~e sorts
        # False=event before True=censoring). mergesort keeps it stable.
        order = np.lexsort((~e, t))
        object.__setattr__(self, "times", _freeze(t[order]))
        object.__setattr__(self, "events", _freeze(e[order]))

    @property
    def n(self) -> int:
        return self.times.shape[0]

    def flipped(self) -> "SurvivalSample":
        """Same times with the event indicator complemented (censoring sample)."""
        return SurvivalSample(self.times, ~self.events, require_positive=False)


@dataclass(frozen=True, eq=False)
class StepCdf:
    """A right-continuous piecewise-constant CDF.

    ``jump_times`` are strictly ascending; ``post_jump_values`` hold the
    CDF value at and after each jump. The value before the first jump is
    0 and the curve is constant beyond the last jump. ``n_obs`` records
    the size of the sample the curve was fitted on (used by the
    resampling estimator); hand-built curves must supply it.
    """

    jump_times: np.ndarray
    post_jump_values: np.ndarray
    reaches_one: bool
    n_obs: int
    _lookup: np.ndarray = field(repr=False, compare=False, default=None)

    def __init__(self, jump_times, post_jump_values, reaches_one, n_obs):
        t = np.asarray(jump_times, dtype=float)
        v = np.asarray(post_jump_values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise InvalidInputError("jump_times and post_jump_values must be 1d, same shape")
        if t.size and np.any(np.diff(t) <= 0):
            raise InvalidInputError("jump_times must be strictly increasing")
        if np.any(v < 0) or np.any(v > 1) or (v.size and np.any(np.diff(v) < 0)):
            raise InvalidInputError("post_jump_values must be non-decreasing within [0, 1]")
        object.__setattr__(self, "jump_times", _freeze(t))
        object.__setattr__(self, "post_jump_values", _freeze(v))
        object.__setattr__(self, "reaches_one", bool(reaches_one))
        object.__setattr__(self, "n_obs", int(n_obs))
        object.__setattr__(self, "_lookup", _freeze(np.concatenate(([0.0], v))))

    def __call__(self, t):
        """Evaluate the CDF at ``t`` (scalar or array), right-continuously.

        Returns 0 below the first jump and the last value beyond the last
        jump; any real argument (including negatives) is accepted.
        """
        idx = np.searchsorted(self.jump_times, t, side="right")
        return self._lookup[idx]

    def left_limit(self, t):
        """Evaluate the left limit F(t-): the value just before ``t``."""
        idx = np.searchsorted(self.jump_times, t, side="left")
        return self._lookup[idx]


@dataclass(frozen=True)
class QuantileEstimate:
    """The level-``p`` quantile of a step CDF: the smallest jump time with value >= p."""

    p: float
    q_hat: float


def km_fit(sample: SurvivalSample) -> StepCdf:
    """Fit the Kaplan-Meier (product-limit) estimator, returned as a CDF.

    At each distinct time with ``d`` observed events out of ``r`` at risk,
    survival multiplies by ``(r - d) / r``; the returned curve is one minus
    that product, jumping only at event times. With no censoring this
    reduces exactly to the empirical CDF. ``reaches_one`` is True iff the
    final at-risk group is wiped out by events (so the CDF attains 1).
    """
    distinct, first_idx, counts = np.unique(
        sample.times, return_index=True, return_counts=True
    )
    # Per distinct time: number of events, and number at risk (everyone
    # with an observed time >= that time).
    d = np.add.reduceat(sample.events.astype(np.int64), first_idx)
    at_risk = sample.n - np.concatenate(([0], np.cumsum(counts)[:-1]))

    jump_times = []
    values = []
    surv = Fraction(1)
    for t_j, d_j, r_j in zip(distinct, d, at_risk):
        if d_j == 0:
            continue
        surv *= Fraction(int(r_j) - int(d_j), int(r_j))
        jump_times.append(t_j)
        values.append(float(1 - surv))
    return StepCdf(
        np.asarray(jump_times, dtype=float),
        np.asarray(values, dtype=float),
        reaches_one=(surv == 0),
        n_obs=sample.n,
    )


def km_fit_censoring(sample: SurvivalSample) -> StepCdf:
    """Kaplan-Meier fit of the censoring distribution (indicator flipped).

    Returns the CDF of the censoring time; the censoring survival
    function is one minus the returned curve.
    """
    return km_fit(sample.flipped())


def cdf_eval(curve: StepCdf, t) -> float:
    """Functional alias for ``curve(t)`` (right-continuous evaluation)."""
    return curve(t)


def quantile(curve: StepCdf, p) -> QuantileEstimate:
    """Smallest jump time whose CDF value reaches ``p``.

    Raises
    ------
    UnreachableQuantileError
        If the curve plateaus below ``p`` (for instance when the largest
        observation is censored), since extrapolating past the data would
        be arbitrary.
    """
    p = check_open_unit(p, "p")
    idx = int(np.searchsorted(curve.post_jump_values, p, side="left"))
    if idx >= curve.post_jump_values.shape[0]:
        top = curve.post_jump_values[-1] if curve.post_jump_values.size else 0.0
        raise UnreachableQuantileError(
            f"CDF tops out at {top:.6g} < p={p:.6g}; quantile not identified"
        )
    return QuantileEstimate(p=p, q_hat=float(curve.jump_times[idx]))


def ecdf(times) -> StepCdf:
    """Empirical CDF of uncensored times, as a StepCdf."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InvalidInputError("need a non-empty 1d array of times")
    distinct, counts = np.unique(t, return_counts=True)
    return StepCdf(
        distinct,
        np.cumsum(counts) / t.size,
        reaches_one=True,
        n_obs=t.size,
    )
