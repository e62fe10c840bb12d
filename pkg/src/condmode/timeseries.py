"""One-step-ahead prediction of a sampled path through curve segments.

The path is cut into ``N`` consecutive blocks of equal length. Block ``i``
becomes the curve ``X_i`` on a shared local grid starting at 0, and the
response paired with it is a scalar summary ``G`` of the *next* block. The
prediction for the block after ``X_N`` is the conditional mode at ``X_N``
given the ``N - 1`` pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Literal

import numpy as np
from numpy.typing import NDArray

from condmode.bandwidth import BandwidthGrid, CVResult, NoUsableBandwidth, cv_select, knn_bandwidth
from condmode.core import ConfigError, Curve, DataError, FunctionalSample
from condmode.estimator import (
    DensityCurveEstimate,
    EstimatorConfig,
    default_interval,
    mode_estimate,
)

Characteristic = Literal["endpoint", "mean", "max", "integral"]

CHARACTERISTICS: dict[str, Callable[[Curve], float]] = {
    "endpoint": lambda c: float(c.values[-1]),
    "mean": lambda c: float(np.mean(c.values)),
    "max": lambda c: float(np.max(c.values)),
    "integral": lambda c: float(np.trapezoid(c.values, c.times)),
}


@dataclass(frozen=True)
class PathSlicingConfig:
    n_segments: int
    characteristic: Characteristic = "endpoint"
    center: bool = False

    def __post_init__(self) -> None:
        if int(self.n_segments) != self.n_segments or self.n_segments < 2:
            raise ConfigError(f"n_segments must be an integer >= 2, got {self.n_segments}")
        if self.characteristic not in CHARACTERISTICS:
            raise ConfigError(
                f"unknown characteristic {self.characteristic!r}; choose from {sorted(CHARACTERISTICS)}"
            )


@dataclass
class SlicedPath:
    segments: list[Curve]
    source_times: NDArray[np.float64]
    samples_per_segment: int
    truncated: int

    def __len__(self) -> int:
        return len(self.segments)

    def __getitem__(self, i: int) -> Curve:
        return self.segments[i]

    def __iter__(self):
        return iter(self.segments)

    def concatenate(self) -> Curve:
        """The (truncated) source path, with its original absolute times."""
        return Curve(self.source_times, np.concatenate([s.values for s in self.segments]))

    def metadata(self) -> dict[str, Any]:
        return {
            "n_segments": len(self.segments),
            "samples_per_segment": self.samples_per_segment,
            "truncated_samples": self.truncated,
            "local_grid": "segment time minus segment start time",
        }


def slice_path(path: Curve, cfg: PathSlicingConfig) -> SlicedPath:
    """Cut ``path`` into ``cfg.n_segments`` equal consecutive blocks.

    Trailing samples that do not fill a whole block are dropped. Blocks share
    the local grid ``times - times[block start]``, which requires a uniform
    sampling step.
    """
    N = cfg.n_segments
    L = len(path.values)
    if L < 2 * N:
        raise DataError(f"path of {L} samples is too short for {N} segments (need >= {2 * N})")
    m = L // N
    used = N * m
    starts = np.arange(N) * m
    local = path.times[:m] - path.times[0]
    offsets = path.times[starts]
    segments = []
    for i, s in enumerate(starts):
        t = path.times[s : s + m] - offsets[i]
        if not np.allclose(t, local, rtol=1e-9, atol=1e-12 * max(1.0, abs(local[-1]))):
            raise DataError(
                f"segment {i + 1} has a different sampling pattern; resample the path to a uniform grid"
            )
        segments.append(Curve(local, path.values[s : s + m]))
    return SlicedPath(segments, path.times[:used], m, L - used)


def build_pairs(
    segments: SlicedPath | list[Curve], characteristic: Characteristic = "endpoint", center: bool = False
) -> FunctionalSample:
    """Pairs ``(X_i, G(X_{i+1}))`` for ``i = 1..N-1``."""
    segs = list(segments)
    if len(segs) < 2:
        raise DataError("need at least 2 segments to build a pair")
    try:
        g = CHARACTERISTICS[characteristic]
    except KeyError:
        raise ConfigError(f"unknown characteristic {characteristic!r}") from None
    responses = np.array([g(s) for s in segs[1:]])
    curves = [_maybe_center(s, center) for s in segs[:-1]]
    return FunctionalSample(tuple(curves), responses, {"characteristic": characteristic, "centered": center})


def _maybe_center(c: Curve, center: bool) -> Curve:
    return Curve(c.times, c.values - np.mean(c.values)) if center else c


@dataclass
class PredictionReport:
    prediction: float
    effective_n: int
    h_k: float
    h_h: float
    warnings: list[str]
    density: DensityCurveEstimate
    n_pairs: int
    truncated: int
    tie_count: int = 1
    knn_k: int | None = None
    cv: CVResult | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return self.effective_n == 0

    def to_json(self) -> dict[str, Any]:
        out = {
            "prediction": self.prediction,
            "effective_n": self.effective_n,
            "h_k": self.h_k,
            "h_h": self.h_h,
            "knn_k": self.knn_k,
            "tie_count": self.tie_count,
            "n_pairs": self.n_pairs,
            "truncated_samples": self.truncated,
            "warnings": list(self.warnings),
        }
        if self.cv is not None:
            out["cv_selected"] = {"h_k": self.cv.h_k, "h_h": self.cv.h_h, "score": self.cv.score}
        out.update(self.extra)
        return out


def predict_next(
    path: Curve,
    slicing: PathSlicingConfig,
    estimator: EstimatorConfig,
    bandwidth_grid: BandwidthGrid | None = None,
    knn_k: int | None = None,
    interval_from_data: bool = False,
    workers: int = 1,
) -> PredictionReport:
    """Predict ``G`` of the segment following the last one.

    ``estimator`` supplies the semi-metric, kernels and (unless overridden)
    the bandwidths and search interval. With ``bandwidth_grid`` the pair
    ``(h_k, h_h)`` is chosen by leave-one-out CV on the ``N - 1`` pairs; with
    ``knn_k`` the curve bandwidth is the kNN radius at ``X_N``. With
    ``interval_from_data`` the search interval is ``[min Y - h_h, max Y + h_h]``.
    An empty ball at ``X_N`` is never fatal: the report is flagged instead.
    """
    sliced = slice_path(path, slicing)
    sample = build_pairs(sliced, slicing.characteristic, slicing.center)
    x_last = _maybe_center(sliced.segments[-1], slicing.center)
    warns: list[str] = []
    cfg = estimator
    if interval_from_data:
        cfg = _with_data_interval(cfg, sample.responses)

    cv = None
    if bandwidth_grid is not None:
        try:
            cv = cv_select(bandwidth_grid, cfg, sample, workers=workers)
        except NoUsableBandwidth as exc:
            warns.append(f"cross-validation failed ({exc}); keeping configured bandwidths")
        else:
            if cv.knn:
                knn_k = int(cv.h_k)
                cfg = cfg.with_bandwidths(h_h=cv.h_h)
            else:
                cfg = cfg.with_bandwidths(h_k=cv.h_k, h_h=cv.h_h)
            if interval_from_data:
                cfg = _with_data_interval(cfg, sample.responses)

    if knn_k is not None:
        if not 1 <= knn_k <= len(sample):
            raise ConfigError(f"kNN rank {knn_k} outside [1, {len(sample)}]")
        cfg = cfg.with_bandwidths(h_k=knn_bandwidth(cfg.semimetric, sample, x_last, knn_k))

    est = mode_estimate(cfg, sample, x_last)
    warns.extend(est.warnings)
    if sliced.truncated:
        warns.append(f"{sliced.truncated} trailing samples dropped to fit {slicing.n_segments} segments")
    return PredictionReport(
        prediction=est.theta_hat,
        effective_n=est.effective_n,
        h_k=cfg.h_k,
        h_h=cfg.h_h,
        warnings=warns,
        density=est.curve,
        n_pairs=len(sample),
        truncated=sliced.truncated,
        tie_count=est.tie_count,
        knn_k=knn_k,
        cv=cv,
    )


def _with_data_interval(cfg: EstimatorConfig, responses: NDArray) -> EstimatorConfig:
    return replace(cfg, interval=default_interval(responses, cfg.h_h, cfg.interval.grid_points))
