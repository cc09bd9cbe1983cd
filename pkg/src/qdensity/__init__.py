"""Density-at-quantile estimation for right-censored data.

Core pipeline: fit the Kaplan-Meier CDF, locate the quantile, then
estimate the density there by regressing Gaussian-perturbed CDF
increments on the perturbations. A plateau search over the perturbation
sd makes the procedure fully data driven, and an inverse-censoring
weighted kernel estimator serves as the comparison baseline. The
``simulate`` module benchmarks both under controlled censoring.
"""

from .errors import (
    CalibrationError,
    DegenerateWeightError,
    InvalidConfigError,
    InvalidInputError,
    ParseError,
    QdensityError,
    SelectionFailureError,
    UnreachableQuantileError,
)
from .estimators import IpcwKernelQuantileDensity, ResamplingQuantileDensity
from .kde import (
    KdeConfig,
    KdeEstimate,
    cv_bandwidth,
    cv_score,
    default_bandwidth_grid,
    kde_at_quantile,
    kde_density,
)
from .resampling import LsConfig, LsEstimate, conditional_expectation_oracle, ls_density
from .selection import (
    EstimateTrace,
    SigmaGrid,
    SigmaSelection,
    default_sigma_grid,
    grid_estimates,
    select_sigma,
)
from .simulate import (
    Cauchy,
    ComparisonResult,
    ComparisonRow,
    Exponential,
    FixedSigma,
    GridSearch,
    MseCurvePoint,
    ScenarioSpec,
    calibrate_censoring,
    generate_sample,
    mse_curve,
    run_comparison,
    true_density_at_quantile,
)
from .survival import (
    QuantileEstimate,
    StepCdf,
    SurvivalSample,
    cdf_eval,
    ecdf,
    km_fit,
    km_fit_censoring,
    quantile,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "Cauchy",
    "ComparisonResult",
    "ComparisonRow",
    "DegenerateWeightError",
    "EstimateTrace",
    "Exponential",
    "FixedSigma",
    "GridSearch",
    "InvalidConfigError",
    "InvalidInputError",
    "IpcwKernelQuantileDensity",
    "KdeConfig",
    "KdeEstimate",
    "LsConfig",
    "LsEstimate",
    "MseCurvePoint",
    "ParseError",
    "QdensityError",
    "QuantileEstimate",
    "ResamplingQuantileDensity",
    "ScenarioSpec",
    "SelectionFailureError",
    "SigmaGrid",
    "SigmaSelection",
    "StepCdf",
    "SurvivalSample",
    "UnreachableQuantileError",
    "calibrate_censoring",
    "cdf_eval",
    "conditional_expectation_oracle",
    "cv_bandwidth",
    "cv_score",
    "default_bandwidth_grid",
    "default_sigma_grid",
    "ecdf",
    "generate_sample",
    "grid_estimates",
    "kde_at_quantile",
    "kde_density",
    "km_fit",
    "km_fit_censoring",
    "ls_density",
    "mse_curve",
    "quantile",
    "run_comparison",
    "select_sigma",
    "true_density_at_quantile",
]
