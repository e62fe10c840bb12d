"""Curves, paired functional samples and their validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class ConfigError(ValueError):
    """Invalid configuration or parameter value."""


def _frozen_array(a: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Curve:
    """A curve observed on a discrete, increasing time grid.

    Construction does not enforce finiteness or monotonicity so that broken
    inputs can still be reported by :func:`validate_sample`.
    """

    times: NDArray[np.float64]
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", _frozen_array(self.times).ravel())
        object.__setattr__(self, "values", _frozen_array(self.values).ravel())

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"Curve(n={len(self.times)}, t=[{self.times[0]:g}, {self.times[-1]:g}])"

    def violations(self) -> list[str]:
        out = []
        if self.times.shape != self.values.shape:
            out.append(f"times/values length mismatch ({len(self.times)} vs {len(self.values)})")
        if len(self.times) < 2:
            out.append("fewer than 2 grid points")
        elif not np.all(np.diff(self.times) > 0):
            out.append("times not strictly increasing")
        if not np.all(np.isfinite(self.times)):
            out.append("non-finite time")
        if not np.all(np.isfinite(self.values)):
            out.append("non-finite value")
        return out

    def same_grid(self, other: Curve) -> bool:
        return self.times.shape == other.times.shape and bool(np.array_equal(self.times, other.times))

    def shifted(self, offset: float) -> Curve:
        return Curve(self.times, self.values + offset)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """Pairs ``(X_i, Y_i)`` with curve-valued ``X_i`` on a common grid."""

    curves: tuple[Curve, ...]
    responses: NDArray[np.float64]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "responses", _frozen_array(self.responses).ravel())

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def times(self) -> NDArray[np.float64]:
        return self.curves[0].times

    @cached_property
    def values(self) -> NDArray[np.float64]:
        """Curve values stacked as an ``(n, T)`` matrix."""
        mat = np.stack([c.values for c in self.curves])
        mat.setflags(write=False)
        return mat

    def subset(self, idx: Sequence[int] | NDArray[np.integer]) -> FunctionalSample:
        idx = np.asarray(idx, dtype=int)
        return FunctionalSample(
            tuple(self.curves[i] for i in idx), self.responses[idx], dict(self.metadata)
        )

    def drop(self, i: int) -> FunctionalSample:
        keep = np.delete(np.arange(len(self)), i)
        return self.subset(keep)


@dataclass(frozen=True)
class ModeSearchInterval:
    """Closed search interval ``[lower, upper]`` sampled at ``grid_points`` points."""

    lower: float
    upper: float
    grid_points: int = 201

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)) or not self.lower < self.upper:
            raise ConfigError(f"need finite lower < upper, got ({self.lower}, {self.upper})")
        if int(self.grid_points) != self.grid_points or self.grid_points < 2:
            raise ConfigError(f"grid_points must be an integer >= 2, got {self.grid_points}")
        object.__setattr__(self, "grid_points", int(self.grid_points))

    @property
    def grid(self) -> NDArray[np.float64]:
        return np.linspace(self.lower, self.upper, self.grid_points)

    @property
    def step(self) -> float:
        return (self.upper - self.lower) / (self.grid_points - 1)

    def shifted(self, offset: float) -> ModeSearchInterval:
        return ModeSearchInterval(self.lower + offset, self.upper + offset, self.grid_points)


@dataclass(frozen=True)
class Violation:
    index: int | None
    rule: str

    def __str__(self) -> str:
        where = "sample" if self.index is None else f"curve {self.index}"
        return f"{where}: {self.rule}"


def validate_sample(sample: FunctionalSample) -> list[Violation]:
    """Return every invariant breach in ``sample``; empty when the sample is usable."""
    report: list[Violation] = []
    n = len(sample.curves)
    if n == 0:
        report.append(Violation(None, "sample is empty"))
    if len(sample.responses) != n:
        report.append(
            Violation(None, f"response count {len(sample.responses)} != curve count {n}")
        )
    for i, y in enumerate(sample.responses):
        if not np.isfinite(y):
            report.append(Violation(i, "non-finite response"))
    for i, c in enumerate(sample.curves):
        report.extend(Violation(i, msg) for msg in c.violations())
    if n:
        ref = sample.curves[0]
        for i, c in enumerate(sample.curves[1:], start=1):
            if not c.same_grid(ref):
                report.append(Violation(i, "time grid differs from curve 0"))
    return report


def require_valid(sample: FunctionalSample) -> None:
    report = validate_sample(sample)
    if report:
        head = "; ".join(str(v) for v in report[:5])
        more = f" (+{len(report) - 5} more)" if len(report) > 5 else ""
        raise DataError(f"invalid sample: {head}{more}")


def require_same_grid(a: Curve, b: Curve) -> None:
    if not a.same_grid(b):
        raise DataError("curves are not on the same time grid")


def resample_curve(c: Curve, target_times: ArrayLike) -> Curve:
    """Linearly interpolate ``c`` onto ``target_times`` (no extrapolation)."""
    target = np.asarray(target_times, dtype=float).ravel()
    lo, hi = c.times[0], c.times[-1]
    outside = np.flatnonzero((target < lo) | (target > hi))
    if outside.size:
        t = target[outside[0]]
        raise DataError(f"target time {t:g} outside source range [{lo:g}, {hi:g}]")
    if target.size > 1 and not np.all(np.diff(target) > 0):
        raise DataError("target times must be strictly increasing")
    return Curve(target, np.interp(target, c.times, c.values))
