"""Resampling least-squares estimate of the density at a quantile.

Draw ``B`` Gaussian perturbations ``e_b ~ N(0, sigma^2)``, push each
through the fitted CDF around the estimated quantile,

    y_b = sqrt(n) * (F(q_hat + e_b / sqrt(n)) - p),

and regress ``y`` on ``e`` without intercept. The slope
``sum(e_b * y_b) / sum(e_b^2)`` estimates the density at the quantile.

``conditional_expectation_oracle`` computes the exact ``B -> infinity``
limit of that slope for a fixed step CDF by integrating against the
Gaussian density in closed form, interval by interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .rng import normal_draws
from .survival import StepCdf, quantile
from .validation import check_open_unit

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Chunk size for the stable reductions below; matches the RNG block size
# so a block's partial sum never straddles worker boundaries.
_CHUNK = 1 << 16


def _stable_sum(x: np.ndarray) -> float:
    """Order-insensitive sum: pairwise within fixed chunks, exact across.

    Each fixed-size chunk is reduced by numpy's pairwise summation and the
    chunk partials are combined with ``math.fsum`` (exactly rounded), so the
    result does not depend on how chunks were distributed over workers and
    stays stable for B in the 1e5..1e6 range.
    """
    n = x.shape[0]
    if n <= _CHUNK:
        return float(np.sum(x))
    partials = [np.sum(x[lo : lo + _CHUNK]) for lo in range(0, n, _CHUNK)]
    return math.fsum(partials)


@dataclass(frozen=True)
class LsConfig:
    """Resampling parameters: number of draws ``B``, Gaussian sd ``sigma``, seed."""

    B: int
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if int(self.B) < 2:
            raise InvalidConfigError(f"B must be >= 2, got {self.B}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidConfigError(f"sigma must be finite and > 0, got {self.sigma}")


@dataclass(frozen=True)
class LsEstimate:
    """Result of the least-squares fit.

    ``mc_se`` is the estimated Monte-Carlo standard error of ``value``
    coming from the finite number of Gaussian draws (linearized ratio
    variance); the data themselves are held fixed.
    """

    value: float
    q_hat: float
    p: float
    config: LsConfig
    mc_se: float


def _ls_value(cdf, q_hat: float, n: int, p: float, eps: np.ndarray) -> tuple[float, float]:
    """Slope and Monte-Carlo se for explicit draws ``eps``.

    ``cdf`` may be any vectorized callable mapping evaluation points to
    [0, 1]; the public entry point passes a fitted step CDF.
    """
    root_n = math.sqrt(n)
    y = root_n * (np.asarray(cdf(q_hat + eps / root_n), dtype=float) - p)
    cross = eps * y
    sq = eps * eps
    num = _stable_sum(cross)
    den = _stable_sum(sq)
    value = num / den
    # Residuals of the linearized ratio; their sum is identically zero.
    resid = cross - value * sq
    mc_se = math.sqrt(_stable_sum(resid * resid)) / den
    return value, mc_se


def ls_density(curve: StepCdf, p: float, config: LsConfig) -> LsEstimate:
    """Estimate the density at the level-``p`` quantile of a fitted CDF.

    Draws are a pure function of ``config.seed``, so repeated calls with
    identical arguments return identical estimates. Perturbations landing
    below the support simply evaluate the CDF to 0; none are discarded.
    """
    p = check_open_unit(p, "p")
    q_hat = quantile(curve, p).q_hat
    eps = normal_draws(config.seed, (), config.B, scale=config.sigma)
    value, mc_se = _ls_value(curve, q_hat, curve.n_obs, p, eps)
    return LsEstimate(value=value, q_hat=q_hat, p=p, config=config, mc_se=mc_se)


def conditional_expectation_oracle(curve: StepCdf, q_hat: float, sigma: float, n: int) -> float:
    """Exact large-``B`` limit of the least-squares slope for a step CDF.

    Computes ``sqrt(n) / sigma^2 * integral of u * (F(q_hat + u/sqrt(n)) -
    F(q_hat)) * phi_sigma(u) du`` where ``phi_sigma`` is the N(0, sigma^2)
    density. On each interval where the step CDF is constant the integral
    has the closed form ``sigma^2 * (phi_sigma(a) - phi_sigma(b))``, so the
    whole expression reduces to a finite sum over the jumps.
    """
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidConfigError(f"sigma must be finite and > 0, got {sigma}")
    root_n = math.sqrt(n)
    breaks = root_n * (curve.jump_times - q_hat)
    with np.errstate(under="ignore"):
        phi = np.exp(-0.5 * (breaks / sigma) ** 2) / (sigma * _SQRT_2PI)
    f0 = float(curve(q_hat))
    # Interval values: 0 below the first jump, then the post-jump levels.
    level = np.concatenate(([0.0], curve.post_jump_values)) - f0
    phi_left = np.concatenate(([0.0], phi))
    phi_right = np.concatenate((phi, [0.0]))
    return root_n * math.fsum(level * (phi_left - phi_right))
