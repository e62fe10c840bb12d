"""Double-kernel conditional density and conditional mode for functional covariates.

For a query curve ``x`` the weights are

    W_i = K(d(x, X_i) / h_k) / sum_j K(d(x, X_j) / h_k)      (0 when the sum is 0)

and the conditional density estimate is ``f(y) = sum_i W_i H((y - Y_i) / h_h) / h_h``.
The conditional mode is the maximizer of ``f`` over an equispaced grid on the
search interval; ties go to the smallest grid value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from numpy.typing import NDArray

from condmode.core import ConfigError, Curve, FunctionalSample, ModeSearchInterval
from condmode.kernels import KernelSpec, eval_h, eval_k, get_kernel
from condmode.semimetrics import SemiMetricSpec, distance_matrix

TIE_RTOL = 1e-12

_BELOW_ONE = np.nextafter(1.0, 0.0)


class KernelComplianceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EstimatorConfig:
    semimetric: SemiMetricSpec = field(default_factory=SemiMetricSpec)
    k_kernel: KernelSpec = field(default_factory=lambda: get_kernel("K", "quadshift"))
    h_kernel: KernelSpec = field(default_factory=lambda: get_kernel("H", "gaussian"))
    h_k: float = 1.0
    h_h: float = 1.0
    interval: ModeSearchInterval = field(default_factory=lambda: ModeSearchInterval(0.0, 1.0))

    def __post_init__(self) -> None:
        if not (np.isfinite(self.h_k) and self.h_k > 0):
            raise ConfigError(f"h_k must be positive, got {self.h_k}")
        if not (np.isfinite(self.h_h) and self.h_h > 0):
            raise ConfigError(f"h_h must be positive, got {self.h_h}")
        if self.k_kernel.role != "K":
            raise ConfigError(f"k_kernel {self.k_kernel.name!r} has role {self.k_kernel.role}")
        if self.h_kernel.role != "H":
            raise ConfigError(f"h_kernel {self.h_kernel.name!r} has role {self.h_kernel.role}")

    def with_bandwidths(self, h_k: float | None = None, h_h: float | None = None) -> EstimatorConfig:
        return replace(
            self,
            h_k=self.h_k if h_k is None else float(h_k),
            h_h=self.h_h if h_h is None else float(h_h),
        )

    def describe(self) -> dict[str, Any]:
        return {
            "semimetric": {"family": self.semimetric.family, "q": self.semimetric.q},
            "k_kernel": self.k_kernel.name,
            "h_kernel": self.h_kernel.name,
            "h_k": self.h_k,
            "h_h": self.h_h,
            "interval": [self.interval.lower, self.interval.upper],
            "grid_points": self.interval.grid_points,
        }


@dataclass
class DensityCurveEstimate:
    y_grid: NDArray[np.float64]
    density: NDArray[np.float64]
    effective_n: int
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "y_grid": self.y_grid.tolist(),
            "density": self.density.tolist(),
            "effective_n": self.effective_n,
            "warnings": list(self.warnings),
        }


@dataclass
class ModeEstimate:
    theta_hat: float
    density_at_mode: float
    tie_count: int
    effective_n: int
    warnings: list[str] = field(default_factory=list)
    curve: DensityCurveEstimate | None = field(default=None, repr=False)

    @property
    def reliable(self) -> bool:
        return self.effective_n > 0

    def to_json(self) -> dict[str, Any]:
        return {
            "theta_hat": self.theta_hat,
            "density_at_mode": self.density_at_mode,
            "tie_count": self.tie_count,
            "effective_n": self.effective_n,
            "warnings": list(self.warnings),
        }


def default_interval(
    responses: NDArray, h_h: float, grid_points: int = 201
) -> ModeSearchInterval:
    """``[min Y - h_h, max Y + h_h]``."""
    y = np.asarray(responses, dtype=float)
    return ModeSearchInterval(float(y.min() - h_h), float(y.max() + h_h), grid_points)


def _check_kernel(cfg: EstimatorConfig) -> list[str]:
    if cfg.k_kernel.h6_compliant:
        return []
    msg = f"K kernel {cfg.k_kernel.name!r} is not bounded away from 0 on its support"
    warnings.warn(msg, KernelComplianceWarning, stacklevel=3)
    return [msg]


def weights_from_distances(k_kernel: KernelSpec, dist: NDArray, h_k: float) -> NDArray[np.float64]:
    in_ball = dist < h_k
    # keep in-ball points inside [0, 1) even if d / h_k rounds up to 1
    t = np.where(in_ball, np.minimum(dist / h_k, _BELOW_ONE), np.inf)
    k = np.where(in_ball, eval_k(k_kernel, t), 0.0)
    total = k.sum()
    if total > 0:
        return k / total
    return np.zeros_like(k)


def density_on_grid(
    h_kernel: KernelSpec, w: NDArray, responses: NDArray, y: NDArray, h_h: float
) -> NDArray[np.float64]:
    """``sum_i w_i H((y - Y_i) / h_h) / h_h`` for each ``y``; only ``w_i > 0`` terms enter."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    active = np.flatnonzero(w)
    if active.size == 0:
        return np.zeros_like(y)
    u = (y[:, None] - responses[active][None, :]) / h_h
    return np.sum(eval_h(h_kernel, u) * w[active], axis=1) / h_h


def argmax_smallest(density: NDArray) -> tuple[int, int]:
    """Index of the first grid maximizer and the number of (near-)maximizers."""
    top = density.max()
    ties = np.flatnonzero(density >= top - TIE_RTOL * abs(top))
    return int(ties[0]), int(ties.size)


def _curve_from_distances(
    cfg: EstimatorConfig, dist: NDArray, responses: NDArray, warns: list[str]
) -> DensityCurveEstimate:
    w = weights_from_distances(cfg.k_kernel, dist, cfg.h_k)
    n_eff = int(np.count_nonzero(dist < cfg.h_k))
    grid = cfg.interval.grid
    dens = density_on_grid(cfg.h_kernel, w, responses, grid, cfg.h_h)
    warns = list(warns)
    if n_eff == 0:
        warns.append("empty ball: no curve within h_k of x; density is identically 0")
    return DensityCurveEstimate(grid, dens, n_eff, warns)


def _mode_from_distances(
    cfg: EstimatorConfig, dist: NDArray, responses: NDArray, warns: list[str]
) -> ModeEstimate:
    curve = _curve_from_distances(cfg, dist, responses, warns)
    idx, ties = argmax_smallest(curve.density)
    warns = list(curve.warnings)
    if curve.effective_n == 0:
        warns.append("mode set to interval lower bound; estimate unreliable")
    elif ties > 1:
        warns.append(f"{ties} grid points attain the maximum; smallest selected")
    return ModeEstimate(
        float(curve.y_grid[idx]), float(curve.density[idx]), ties, curve.effective_n, warns, curve
    )


def weights(cfg: EstimatorConfig, sample: FunctionalSample, x: Curve) -> NDArray[np.float64]:
    _check_kernel(cfg)
    return weights_from_distances(cfg.k_kernel, distance_matrix(cfg.semimetric, sample, x), cfg.h_k)


def cond_density_at(cfg: EstimatorConfig, sample: FunctionalSample, x: Curve, y: float) -> float:
    w = weights(cfg, sample, x)
    return float(density_on_grid(cfg.h_kernel, w, sample.responses, np.array([y]), cfg.h_h)[0])


def cond_density_curve(cfg: EstimatorConfig, sample: FunctionalSample, x: Curve) -> DensityCurveEstimate:
    warns = _check_kernel(cfg)
    dist = distance_matrix(cfg.semimetric, sample, x)
    return _curve_from_distances(cfg, dist, sample.responses, warns)


def mode_estimate(cfg: EstimatorConfig, sample: FunctionalSample, x: Curve) -> ModeEstimate:
    warns = _check_kernel(cfg)
    dist = distance_matrix(cfg.semimetric, sample, x)
    return _mode_from_distances(cfg, dist, sample.responses, warns)


def small_ball_empirical(spec: SemiMetricSpec, sample: FunctionalSample, x: Curve, h: float) -> float:
    """Fraction of sample curves strictly inside the ball ``B(x, h)``."""
    if not h > 0:
        raise ConfigError(f"radius must be positive, got {h}")
    dist = distance_matrix(spec, sample, x)
    return float(np.count_nonzero(dist < h)) / len(dist)
