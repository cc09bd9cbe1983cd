"""Monte Carlo harness: scenario generation, calibration, comparisons, MSE sweeps.

Survival times come from an exponential or Cauchy model; censoring times
are exponential with a rate calibrated to hit a target censoring
fraction. Every replicate draws from a stream keyed by ``(master_seed,
replicate)``, so results are identical no matter how replicates are
scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import integrate, optimize, stats

from .errors import CalibrationError, InvalidConfigError, UnreachableQuantileError
from .kde import KdeConfig, cv_bandwidth, default_bandwidth_grid, kde_density
from .resampling import LsConfig, _ls_value, ls_density
from .rng import child_seed, normal_draws, stream
from .selection import SigmaGrid, grid_estimates, select_sigma, trace_values
from .survival import SurvivalSample, km_fit, km_fit_censoring, quantile
from .validation import check_count, check_open_unit, check_positive

# Stream tags under a replicate's key: data draws vs. estimator draws.
_DATA_STREAM = 0
_LS_STREAM = 1


@dataclass(frozen=True)
class Exponential:
    """Exponential survival model with the given rate."""

    rate: float

    name = "exp"

    def __post_init__(self):
        check_positive(self.rate, "rate")

    def quantile(self, p: float) -> float:
        return float(stats.expon.ppf(p, scale=1.0 / self.rate))

    def density(self, x: float) -> float:
        return float(stats.expon.pdf(x, scale=1.0 / self.rate))

    def survival(self, x) -> float:
        return stats.expon.sf(x, scale=1.0 / self.rate)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(1.0 / self.rate, size)

    positive_support = True


@dataclass(frozen=True)
class Cauchy:
    """Cauchy survival model (support on the whole real line)."""

    location: float = 0.0
    scale: float = 1.0

    name = "cauchy"

    def __post_init__(self):
        check_positive(self.scale, "scale")

    def quantile(self, p: float) -> float:
        return float(stats.cauchy.ppf(p, loc=self.location, scale=self.scale))

    def density(self, x: float) -> float:
        return float(stats.cauchy.pdf(x, loc=self.location, scale=self.scale))

    def survival(self, x) -> float:
        return stats.cauchy.sf(x, loc=self.location, scale=self.scale)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.location + self.scale * rng.standard_cauchy(size)

    positive_support = False


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation setting: generative model, size, censoring, budgets."""

    survival: Exponential | Cauchy
    target_censoring: float
    n: int
    p: float = 0.5
    replications: int = 500
    B: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.target_censoring < 1.0:
            raise InvalidConfigError(
                f"target_censoring must lie in [0, 1), got {self.target_censoring}"
            )
        check_count(self.n, "n")
        check_open_unit(self.p, "p")
        check_count(self.replications, "replications")
        check_count(self.B, "B", minimum=2)


@dataclass(frozen=True)
class FixedSigma:
    """Use one fixed perturbation sd for every replicate."""

    sigma: float

    def __post_init__(self):
        check_positive(self.sigma, "sigma")


@dataclass(frozen=True)
class GridSearch:
    """Select the perturbation sd per replicate by plateau detection."""

    grid: SigmaGrid
    h: int = 20


@dataclass(frozen=True)
class ComparisonRow:
    """Aggregated Monte Carlo summary for one method."""

    method: str  # "LS" or "KDE"
    censoring: float
    n: int
    bias: float
    variance: float
    mse: float


@dataclass(frozen=True)
class ComparisonResult:
    """Rows for both methods plus bookkeeping about the run."""

    rows: list[ComparisonRow]
    scenario: str
    p: float
    true_density: float
    n_excluded: int
    n_used: int
    master_seed: int


@dataclass(frozen=True)
class MseCurvePoint:
    sigma: float
    mse: float


def true_density_at_quantile(spec: ScenarioSpec) -> float:
    """Analytic density of the survival model at its level-``p`` quantile."""
    return spec.survival.density(spec.survival.quantile(spec.p))


def calibrate_censoring(spec: ScenarioSpec) -> float:
    """Exponential censoring rate hitting the target censoring fraction.

    For exponential survival the competing-exponentials identity gives the
    closed form ``rate_c = target * rate / (1 - target)``. Otherwise the
    censoring probability ``P(C < T)`` is evaluated by adaptive quadrature
    of ``rate_c * exp(-rate_c * c) * S_T(c)`` over ``c > 0`` and the rate
    is found by bisection to 1e-6.
    """
    target = spec.target_censoring
    if not 0.0 <= target <= 0.95:
        raise CalibrationError(f"target censoring {target} outside calibratable range")
    if target == 0.0:
        return 0.0
    model = spec.survival
    if isinstance(model, Exponential):
        return target * model.rate / (1.0 - target)

    def censored_fraction(rate_c: float) -> float:
        # P(C < T) = E[S_T(C)]; substituting u = exp(-rate_c * c) maps the
        # integral onto (0, 1], which keeps the quadrature well behaved for
        # any rate.
        value, _ = integrate.quad(
            lambda u: float(model.survival(-math.log(u) / rate_c)), 0.0, 1.0
        )
        return value

    lo, hi = 1e-9, 1.0
    while censored_fraction(hi) < target:
        hi *= 2.0
        if hi > 1e6:
            raise CalibrationError(
                f"no censoring rate reaches fraction {target} for {model.name}"
            )
    return float(
        optimize.bisect(lambda r: censored_fraction(r) - target, lo, hi, xtol=1e-6)
    )


def generate_sample(spec: ScenarioSpec, censoring_rate: float, replicate: int) -> SurvivalSample:
    """Draw one replicate's observed sample, keyed by ``(master_seed, replicate)``."""
    rng = stream(spec.master_seed, replicate, _DATA_STREAM)
    latent = spec.survival.draw(rng, spec.n)
    if censoring_rate > 0.0:
        cens = rng.exponential(1.0 / censoring_rate, spec.n)
    else:
        cens = np.full(spec.n, np.inf)
    observed = np.minimum(latent, cens)
    events = latent <= cens
    return SurvivalSample(
        observed, events, require_positive=spec.survival.positive_support
    )


def _ls_estimate(curve, spec: ScenarioSpec, selector, replicate: int) -> float:
    seed = child_seed(spec.master_seed, replicate, _LS_STREAM)
    if isinstance(selector, FixedSigma):
        cfg = LsConfig(B=spec.B, sigma=selector.sigma, seed=seed)
        return ls_density(curve, spec.p, cfg).value
    trace = grid_estimates(curve, spec.p, selector.grid, spec.B, seed, h=selector.h)
    chosen = select_sigma(selector.grid, trace)
    hits = np.flatnonzero(selector.grid.values == chosen.sigma)
    if hits.size:
        # The midpoint landed on a grid point: reuse the trace value there.
        return float(trace.estimates[hits[0]])
    # Between grid points: evaluate there with the same shared draws.
    q_hat = quantile(curve, spec.p).q_hat
    draws = normal_draws(seed, (), spec.B)
    return _ls_value(curve, q_hat, curve.n_obs, spec.p, chosen.sigma * draws)[0]


def _comparison_replicate(spec, censoring_rate, selector, kde_config, replicate):
    sample = generate_sample(spec, censoring_rate, replicate)
    curve = km_fit(sample)
    try:
        q_hat = quantile(curve, spec.p).q_hat
    except UnreachableQuantileError:
        return None
    ls_value = _ls_estimate(curve, spec, selector, replicate)
    cens_curve = km_fit_censoring(sample)
    config = kde_config if kde_config is not None else default_bandwidth_grid(sample)
    bandwidth = cv_bandwidth(sample, cens_curve, config)
    kde_value = kde_density(sample, cens_curve, q_hat, bandwidth)
    return ls_value, kde_value


def _map_replicates(worker, replications: int, jobs: int) -> list:
    indices = range(replications)
    if jobs <= 1:
        return [worker(r) for r in indices]
    chunk = max(1, replications // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, indices, chunksize=chunk))


def _summaries(values: np.ndarray, truth: float) -> tuple[float, float, float]:
    bias = float(np.mean(values) - truth)
    variance = float(np.var(values))  # population convention: mse == bias^2 + var
    mse = float(np.mean((values - truth) ** 2))
    return bias, variance, mse


def run_comparison(
    spec: ScenarioSpec,
    selector: FixedSigma | GridSearch,
    kde_config: KdeConfig | None = None,
    jobs: int = 1,
) -> ComparisonResult:
    """Monte Carlo comparison of the resampling and kernel estimators.

    Replicates whose Kaplan-Meier curve never reaches level ``p`` are
    excluded from the summaries and counted in ``n_excluded``.
    """
    truth = true_density_at_quantile(spec)
    censoring_rate = calibrate_censoring(spec)
    worker = partial(_comparison_replicate, spec, censoring_rate, selector, kde_config)
    outcomes = _map_replicates(worker, spec.replications, jobs)
    kept = [o for o in outcomes if o is not None]
    if not kept:
        raise UnreachableQuantileError("every replicate failed to reach the quantile")
    ls_vals = np.array([k[0] for k in kept])
    kde_vals = np.array([k[1] for k in kept])
    rows = [
        ComparisonRow("LS", spec.target_censoring, spec.n, *_summaries(ls_vals, truth)),
        ComparisonRow("KDE", spec.target_censoring, spec.n, *_summaries(kde_vals, truth)),
    ]
    return ComparisonResult(
        rows=rows,
        scenario=spec.survival.name,
        p=spec.p,
        true_density=truth,
        n_excluded=len(outcomes) - len(kept),
        n_used=len(kept),
        master_seed=spec.master_seed,
    )


def _curve_replicate(spec, censoring_rate, sigmas, replicate):
    sample = generate_sample(spec, censoring_rate, replicate)
    curve = km_fit(sample)
    try:
        quantile(curve, spec.p)
    except UnreachableQuantileError:
        return None
    seed = child_seed(spec.master_seed, replicate, _LS_STREAM)
    return trace_values(curve, spec.p, sigmas, spec.B, seed)


def mse_curve_detail(
    spec: ScenarioSpec, grid: SigmaGrid, jobs: int = 1
) -> tuple[list[MseCurvePoint], int]:
    """MSE per grid sigma plus the count of excluded replicates."""
    truth = true_density_at_quantile(spec)
    censoring_rate = calibrate_censoring(spec)
    worker = partial(_curve_replicate, spec, censoring_rate, grid.values)
    outcomes = _map_replicates(worker, spec.replications, jobs)
    kept = [o for o in outcomes if o is not None]
    if not kept:
        raise UnreachableQuantileError("every replicate failed to reach the quantile")
    estimates = np.vstack(kept)  # replicates x grid
    mse = np.mean((estimates - truth) ** 2, axis=0)
    points = [MseCurvePoint(float(s), float(m)) for s, m in zip(grid.values, mse)]
    return points, len(outcomes) - len(kept)


def mse_curve(spec: ScenarioSpec, grid: SigmaGrid, jobs: int = 1) -> list[MseCurvePoint]:
    """MSE of the resampling estimator at each grid sigma, in grid order."""
    points, _ = mse_curve_detail(spec, grid, jobs)
    return points
