"""Semi-metrics between discretized curves.

Three families are provided:

* ``l2``: the L2 norm of the difference, with trapezoidal quadrature.
* ``deriv``: the L2 distance between order-``q`` forward-difference derivatives.
* ``pca``: the Euclidean norm of the first ``q`` functional principal scores of
  the difference. This is a genuine semi-metric: two different curves whose
  difference is orthogonal to the retained eigenfunctions are at distance 0.

All batch computations go through :func:`_pairwise_sq`, so ``distance`` and
``distance_matrix`` are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray

from condmode.core import ConfigError, Curve, DataError, FunctionalSample, require_same_grid

Family = Literal["l2", "deriv", "pca"]


def trapezoid_weights(times: NDArray[np.float64]) -> NDArray[np.float64]:
    """Weights ``w`` such that ``sum(w * f)`` is the trapezoidal integral of ``f``."""
    dt = np.diff(times)
    w = np.zeros_like(times)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def forward_difference(
    times: NDArray[np.float64], values: NDArray[np.float64], order: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Apply ``order`` forward differences along the last axis.

    Each pass divides by the local step and drops the last grid point.
    """
    t, v = times, values
    for _ in range(order):
        v = np.diff(v, axis=-1) / np.diff(t)
        t = t[:-1]
    return t, v


@dataclass(frozen=True, eq=False)
class SemiMetricSpec:
    family: Family = "l2"
    q: int = 1
    eigenbasis: NDArray[np.float64] | None = None
    eigenvalues: NDArray[np.float64] | None = None
    grid: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        if self.family not in ("l2", "deriv", "pca"):
            raise ConfigError(f"unknown semi-metric family {self.family!r}")
        if self.family != "l2" and (int(self.q) != self.q or self.q < 1):
            raise ConfigError(f"q must be a positive integer, got {self.q}")
        object.__setattr__(self, "q", int(self.q))

    @property
    def fitted(self) -> bool:
        return self.eigenbasis is not None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family, "q": self.q}
        if self.eigenbasis is not None:
            out["eigenbasis"] = self.eigenbasis.tolist()
            out["eigenvalues"] = self.eigenvalues.tolist()
            out["grid"] = self.grid.tolist()
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> SemiMetricSpec:
        basis = obj.get("eigenbasis")
        if basis is None:
            return cls(obj["family"], obj.get("q", 1))
        return cls(
            obj["family"],
            obj["q"],
            np.asarray(basis, dtype=float),
            np.asarray(obj["eigenvalues"], dtype=float),
            np.asarray(obj["grid"], dtype=float),
        )


def fit_pca(spec: SemiMetricSpec, sample: FunctionalSample) -> SemiMetricSpec:
    """Fit the eigenbasis of the empirical covariance operator of ``sample``.

    Eigenfunctions are orthonormal for the quadrature inner product
    ``<f, g> = sum(w * f * g)`` and sorted by decreasing eigenvalue.
    """
    if spec.family != "pca":
        raise ConfigError("fit_pca requires a 'pca' semi-metric")
    times = sample.times
    n, T = sample.values.shape
    if spec.q > T:
        raise ConfigError(f"q={spec.q} exceeds grid size {T}")
    if spec.q > n:
        raise ConfigError(f"q={spec.q} exceeds curve count {n}")
    w = trapezoid_weights(times)
    sw = np.sqrt(w)
    centered = sample.values - sample.values.mean(axis=0)
    cov = centered.T @ centered / n
    evals, evecs = np.linalg.eigh(sw[:, None] * cov * sw[None, :])
    # stable sort keeps ties in eigh's output order
    order = np.argsort(-evals, kind="stable")[: spec.q]
    basis = (evecs[:, order] / sw[:, None]).T
    # deterministic sign: largest-magnitude coordinate positive
    pivots = np.argmax(np.abs(basis), axis=1)
    basis *= np.sign(basis[np.arange(spec.q), pivots])[:, None]
    evals = np.clip(evals[order], 0.0, None)
    return SemiMetricSpec("pca", spec.q, basis, evals, times.copy())


def _pairwise_sq(spec: SemiMetricSpec, times: NDArray, diffs: NDArray) -> NDArray:
    """Squared semi-metric for each row of ``diffs`` (curve differences)."""
    if spec.family == "l2":
        w = trapezoid_weights(times)
        return np.sum(diffs * diffs * w, axis=-1)
    if spec.family == "deriv":
        if len(times) < spec.q + 2:
            raise DataError(f"grid of {len(times)} points too short for derivative order {spec.q}")
        t, dv = forward_difference(times, diffs, spec.q)
        w = trapezoid_weights(t)
        return np.sum(dv * dv * w, axis=-1)
    if not spec.fitted:
        raise ConfigError("pca semi-metric used before fit_pca")
    if spec.grid.shape != times.shape or not np.array_equal(spec.grid, times):
        raise DataError("curves are not on the grid the pca semi-metric was fitted on")
    w = trapezoid_weights(times)
    scores = np.stack([np.sum(diffs * w * e, axis=-1) for e in spec.eigenbasis], axis=-1)
    return np.sum(scores * scores, axis=-1)


def distance(spec: SemiMetricSpec, u: Curve, v: Curve) -> float:
    require_same_grid(u, v)
    diff = (u.values - v.values)[None, :]
    return float(np.sqrt(_pairwise_sq(spec, u.times, diff))[0])


def distance_matrix(spec: SemiMetricSpec, sample: FunctionalSample, x: Curve) -> NDArray[np.float64]:
    """Distances ``d(x, X_i)`` for every curve of ``sample``."""
    require_same_grid(x, sample.curves[0])
    diffs = x.values[None, :] - sample.values
    return np.sqrt(_pairwise_sq(spec, x.times, diffs))


def pairwise_distances(spec: SemiMetricSpec, sample: FunctionalSample) -> NDArray[np.float64]:
    """Full ``(n, n)`` matrix; row ``i`` equals ``distance_matrix(spec, sample, X_i)``."""
    return np.stack([distance_matrix(spec, sample, c) for c in sample.curves])
