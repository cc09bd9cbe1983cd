"""Scikit-learn style estimators for density-at-quantile inference.

Both classes follow the usual fit/attributes contract (``get_params`` /
``set_params`` come from :class:`sklearn.base.BaseEstimator`, fitted
attributes carry a trailing underscore), so they drop into pipelines,
``clone`` and parameter search without adapters.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .kde import KdeConfig, cv_bandwidth, default_bandwidth_grid, kde_density
from .resampling import LsConfig, _ls_value, ls_density
from .rng import normal_draws
from .selection import (
    DEFAULT_WINDOW,
    SigmaGrid,
    default_sigma_grid,
    grid_estimates,
    select_sigma,
)
from .survival import SurvivalSample, km_fit, km_fit_censoring, quantile
from .validation import check_positive


def _check_fitted(estimator, attribute: str):
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call fit first."
        )


class ResamplingQuantileDensity(BaseEstimator):
    """Density at a quantile of right-censored data, by resampling least squares.

    Fits the Kaplan-Meier CDF, locates the level-``p`` quantile, and
    regresses perturbed CDF increments on ``B`` Gaussian perturbations.
    When ``sigma`` is None the perturbation sd is selected automatically
    by scanning a grid and detecting the plateau where estimates are
    stable.

    Parameters
    ----------
    p : float, default=0.5
        Quantile level in (0, 1).
    B : int, default=100000
        Number of Gaussian draws in the least-squares fit.
    sigma : float or None, default=None
        Perturbation standard deviation. None selects it automatically.
    sigma_grid : array-like or None, default=None
        Candidate sigmas for automatic selection (None: 0.05..10 step 0.05).
    h : int, default=20
        Neighborhood half-width used by the plateau search.
    random_state : int, default=0
        Seed for the deterministic draw streams.
    require_positive : bool, default=True
        Reject non-positive observation times (set False for models
        supported on the whole line).

    Attributes
    ----------
    cdf_ : StepCdf
        Fitted Kaplan-Meier CDF.
    quantile_ : float
        Estimated level-``p`` quantile.
    sigma_ : float
        Perturbation sd actually used.
    density_ : float
        Estimated density at the quantile.
    trace_ : ndarray of shape (len(sigma_grid),)
        Per-sigma estimates (only when selection ran).
    selection_ : SigmaSelection
        Plateau diagnostics (only when selection ran).
    """

    def __init__(
        self,
        p=0.5,
        B=100_000,
        sigma=None,
        sigma_grid=None,
        h=DEFAULT_WINDOW,
        random_state=0,
        require_positive=True,
    ):
        self.p = p
        self.B = B
        self.sigma = sigma
        self.sigma_grid = sigma_grid
        self.h = h
        self.random_state = random_state
        self.require_positive = require_positive

    def fit(self, T, delta):
        """Fit on observed times ``T`` and event indicators ``delta``.

        Returns self.
        """
        sample = SurvivalSample(T, delta, require_positive=self.require_positive)
        self.n_ = sample.n
        self.cdf_ = km_fit(sample)
        self.quantile_ = quantile(self.cdf_, self.p).q_hat
        if self.sigma is not None:
            self.sigma_ = check_positive(self.sigma, "sigma")
            result = ls_density(
                self.cdf_, self.p, LsConfig(B=self.B, sigma=self.sigma_, seed=self.random_state)
            )
            self.density_ = result.value
            return self
        grid = (
            default_sigma_grid()
            if self.sigma_grid is None
            else SigmaGrid(np.asarray(self.sigma_grid, dtype=float))
        )
        trace = grid_estimates(
            self.cdf_, self.p, grid, self.B, seed=self.random_state, h=self.h
        )
        chosen = select_sigma(grid, trace)
        self.trace_ = trace.estimates
        self.selection_ = chosen
        self.sigma_ = chosen.sigma
        hits = np.flatnonzero(grid.values == chosen.sigma)
        if hits.size:
            self.density_ = float(trace.estimates[hits[0]])
        else:
            draws = normal_draws(self.random_state, (), self.B)
            self.density_ = _ls_value(
                self.cdf_, self.quantile_, self.cdf_.n_obs, self.p, chosen.sigma * draws
            )[0]
        return self

    def predict(self):
        """Return the fitted density estimate."""
        _check_fitted(self, "density_")
        return self.density_


class IpcwKernelQuantileDensity(BaseEstimator):
    """Inverse-censoring-weighted Gaussian kernel density at a quantile.

    Events are reweighted by the inverse censoring survival (fitted by the
    flipped Kaplan-Meier estimator) and smoothed with a Gaussian kernel
    whose bandwidth is chosen by least-squares cross-validation unless
    given explicitly.

    Parameters
    ----------
    p : float, default=0.5
        Quantile level at which the density is reported.
    bandwidth : float or None, default=None
        Kernel bandwidth; None cross-validates over ``bandwidth_grid``.
    bandwidth_grid : array-like or None, default=None
        Candidate bandwidths (None: log-spaced from the data scale).
    require_positive : bool, default=True
        As in :class:`ResamplingQuantileDensity`.

    Attributes
    ----------
    quantile_ : float
    bandwidth_ : float
    density_ : float
    """

    def __init__(self, p=0.5, bandwidth=None, bandwidth_grid=None, require_positive=True):
        self.p = p
        self.bandwidth = bandwidth
        self.bandwidth_grid = bandwidth_grid
        self.require_positive = require_positive

    def fit(self, T, delta):
        """Fit on observed times ``T`` and event indicators ``delta``; returns self."""
        sample = SurvivalSample(T, delta, require_positive=self.require_positive)
        self.n_ = sample.n
        self.sample_ = sample
        curve = km_fit(sample)
        self.quantile_ = quantile(curve, self.p).q_hat
        self.censoring_cdf_ = km_fit_censoring(sample)
        if self.bandwidth is not None:
            self.bandwidth_ = check_positive(self.bandwidth, "bandwidth")
        else:
            config = (
                default_bandwidth_grid(sample)
                if self.bandwidth_grid is None
                else KdeConfig(np.asarray(self.bandwidth_grid, dtype=float))
            )
            self.bandwidth_ = cv_bandwidth(sample, self.censoring_cdf_, config)
        self.density_ = kde_density(sample, self.censoring_cdf_, self.quantile_, self.bandwidth_)
        return self

    def predict(self):
        """Return the fitted density estimate at the quantile."""
        _check_fitted(self, "density_")
        return self.density_

    def evaluate(self, t):
        """Density estimate at arbitrary points ``t`` with the fitted bandwidth."""
        _check_fitted(self, "density_")
        t = np.atleast_1d(np.asarray(t, dtype=float))
        values = np.array(
            [kde_density(self.sample_, self.censoring_cdf_, float(x), self.bandwidth_) for x in t]
        )
        return values if values.size > 1 else float(values[0])
