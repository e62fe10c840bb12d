"""Bandwidth choice: k-nearest-neighbour curve bandwidths and leave-one-out CV."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from condmode.core import ConfigError, Curve, DataError, FunctionalSample
from condmode.estimator import EstimatorConfig, _mode_from_distances
from condmode.semimetrics import SemiMetricSpec, distance_matrix, pairwise_distances

KNN_INFLATION = 1e-9


class NoUsableBandwidth(DataError):
    pass


def knn_from_distances(dist: NDArray, k: int) -> float:
    n = len(dist)
    if not 1 <= k <= n:
        raise ConfigError(f"k must lie in [1, {n}], got {k}")
    kth = float(np.partition(dist, k - 1)[k - 1])
    h = kth * (1.0 + KNN_INFLATION)
    # a zero k-th distance still needs a positive radius
    return h if h > 0 else np.finfo(float).tiny


def knn_bandwidth(spec: SemiMetricSpec, sample: FunctionalSample, x: Curve, k: int) -> float:
    """k-th smallest distance from ``x``, inflated so those ``k`` curves are strictly inside.

    With ties at the k-th distance more than ``k`` curves can fall in the ball.
    """
    return knn_from_distances(distance_matrix(spec, sample, x), k)


@dataclass(frozen=True)
class BandwidthGrid:
    """Candidate bandwidths. With ``knn=True`` the ``hk_candidates`` are neighbour ranks."""

    hk_candidates: tuple[float, ...]
    hh_candidates: tuple[float, ...]
    knn: bool = False

    def __post_init__(self) -> None:
        hk = tuple(sorted(self.hk_candidates))
        hh = tuple(sorted(float(h) for h in self.hh_candidates))
        if not hk or not hh:
            raise ConfigError("candidate lists must be nonempty")
        if min(hk) <= 0 or min(hh) <= 0:
            raise ConfigError("all bandwidth candidates must be positive")
        if self.knn:
            if any(int(k) != k for k in hk):
                raise ConfigError("kNN candidates must be integers")
            hk = tuple(int(k) for k in hk)
        else:
            hk = tuple(float(h) for h in hk)
        object.__setattr__(self, "hk_candidates", hk)
        object.__setattr__(self, "hh_candidates", hh)

    @classmethod
    def default(cls, responses: NDArray, knn: bool = True) -> BandwidthGrid:
        """Rank fractions 5/10/20/40 % and a Silverman-type scale times 0.5, 1, 2."""
        y = np.asarray(responses, dtype=float)
        n = len(y)
        ks = sorted({min(max(1, math.ceil(f * n)), n) for f in (0.05, 0.10, 0.20, 0.40)})
        sd = float(np.std(y, ddof=1)) if n > 1 else 0.0
        base = 1.06 * sd * n ** (-1 / 5)
        if not base > 0:
            base = 1.0
        return cls(tuple(ks), tuple(base * c for c in (0.5, 1.0, 2.0)), knn=knn)

    def pairs(self) -> list[tuple[float, float]]:
        return [(hk, hh) for hk in self.hk_candidates for hh in self.hh_candidates]


@dataclass
class CVResult:
    h_k: float
    h_h: float
    score: float
    knn: bool
    table: list[dict[str, Any]] = field(default_factory=list)

    @property
    def scores(self) -> NDArray[np.float64]:
        hk = sorted({r["h_k"] for r in self.table})
        hh = sorted({r["h_h"] for r in self.table})
        out = np.full((len(hk), len(hh)), np.nan)
        for r in self.table:
            out[hk.index(r["h_k"]), hh.index(r["h_h"])] = r["score"]
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "h_k": self.h_k,
            "h_h": self.h_h,
            "score": self.score,
            "knn": self.knn,
            "table": self.table,
        }


def _loo_errors(
    template: EstimatorConfig, dmat: NDArray, responses: NDArray, hk: float, hh: float, knn: bool
) -> tuple[list[float], int]:
    n = len(responses)
    errors, excluded = [], 0
    for i in range(n):
        keep = np.arange(n) != i
        dist = dmat[i, keep]
        h_k = knn_from_distances(dist, int(hk)) if knn else hk
        cfg = template.with_bandwidths(h_k, hh)
        est = _mode_from_distances(cfg, dist, responses[keep], [])
        if est.effective_n == 0:
            excluded += 1
            continue
        errors.append((est.theta_hat - responses[i]) ** 2)
    return errors, excluded


def _score_pair(args):
    template, dmat, responses, hk, hh, knn, min_coverage = args
    errors, excluded = _loo_errors(template, dmat, responses, hk, hh, knn)
    score = math.fsum(errors) / len(errors) if errors else math.nan
    eligible = bool(errors) and len(errors) >= min_coverage * len(responses)
    return {"h_k": hk, "h_h": hh, "score": score, "excluded_folds": excluded, "eligible": eligible}


def cv_select(
    grid: BandwidthGrid,
    template: EstimatorConfig,
    sample: FunctionalSample,
    workers: int = 1,
    min_coverage: float = 0.5,
) -> CVResult:
    """Leave-one-out squared-error selection of ``(h_k, h_h)`` for the mode predictor.

    Fold ``i`` predicts ``Y_i`` from the other ``n - 1`` pairs at ``x = X_i``.
    Folds whose ball is empty are excluded from that candidate's score and
    counted. A candidate is eligible only if at least ``min_coverage`` of the
    folds are usable; otherwise a radius so small that only a few near-duplicate
    curves see a neighbour could win on a handful of folds. Ties go to the
    smaller ``h_k``, then the smaller ``h_h``. The search interval of
    ``template`` is used for every fold.
    """
    n = len(sample)
    if n < 3:
        raise DataError(f"cross-validation needs at least 3 pairs, got {n}")
    if not 0 <= min_coverage <= 1:
        raise ConfigError("min_coverage must lie in [0, 1]")
    if grid.knn and max(grid.hk_candidates) > n - 1:
        raise ConfigError(f"kNN rank {max(grid.hk_candidates)} exceeds n - 1 = {n - 1}")
    dmat = pairwise_distances(template.semimetric, sample)
    jobs = [
        (template, dmat, sample.responses, hk, hh, grid.knn, min_coverage) for hk, hh in grid.pairs()
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            table = list(pool.map(_score_pair, jobs))
    else:
        table = [_score_pair(j) for j in jobs]

    best = None
    for row in table:  # already sorted by (h_k, h_h)
        if not row["eligible"]:
            continue
        if best is None or row["score"] < best["score"]:
            best = row
    if best is None:
        raise NoUsableBandwidth(
            f"no usable bandwidth: no candidate has a nonempty ball in {min_coverage:.0%} of the folds"
        )
    return CVResult(best["h_k"], best["h_h"], best["score"], grid.knn, table)


def resolve_bandwidth(
    cfg: EstimatorConfig, sample: FunctionalSample, x: Curve, knn_k: int | None
) -> EstimatorConfig:
    """Return ``cfg`` with ``h_k`` replaced by the kNN bandwidth at ``x`` when ``knn_k`` is set."""
    if knn_k is None:
        return cfg
    return cfg.with_bandwidths(h_k=knn_bandwidth(cfg.semimetric, sample, x, knn_k))

