"""Kernel conditional-mode estimation for curve-valued covariates."""

from condmode.bandwidth import BandwidthGrid, CVResult, cv_select, knn_bandwidth
from condmode.core import (
    ConfigError,
    Curve,
    DataError,
    FunctionalSample,
    ModeSearchInterval,
    resample_curve,
    validate_sample,
)
from condmode.estimator import (
    DensityCurveEstimate,
    EstimatorConfig,
    ModeEstimate,
    cond_density_at,
    cond_density_curve,
    default_interval,
    mode_estimate,
    small_ball_empirical,
    weights,
)
from condmode.kernels import KernelSpec, check_compliance, eval_h, eval_k, get_kernel
from condmode.semimetrics import SemiMetricSpec, distance, distance_matrix, fit_pca
from condmode.simulate import GeneratorSpec, RateStudyConfig, generate, rate_study
from condmode.timeseries import PathSlicingConfig, build_pairs, predict_next, slice_path

__version__ = "0.1.0"
