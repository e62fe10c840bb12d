"""Kernel registry.

Two roles: ``K`` smooths curve distances and must be supported on ``[0, 1)``,
bounded away from zero there; ``H`` smooths responses and must be a density.
Kernels failing those conditions can still be registered but carry a flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from condmode.core import ConfigError

Role = Literal["K", "H"]

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _box(t):
    return np.where((t >= 0) & (t < 1), 1.0, 0.0)


def _quadshift(t):
    return np.where((t >= 0) & (t < 1), 1.0 - t * t / 2, 0.0)


def _epan_half(t):
    return np.where((t >= 0) & (t < 1), 0.75 * (1.0 - t * t), 0.0)


def _gaussian(t):
    return np.exp(-0.5 * t * t) / _SQRT_2PI


def _epan(t):
    return np.where(np.abs(t) <= 1, 0.75 * (1.0 - t * t), 0.0)


@dataclass(frozen=True)
class KernelSpec:
    role: Role
    name: str
    func: Callable[[NDArray], NDArray] = field(repr=False, compare=False)
    h6_compliant: bool = False
    h7_compliant: bool = False
    scale: float = 1.0

    def scaled(self, c: float) -> KernelSpec:
        if not c > 0:
            raise ConfigError("kernel scale must be positive")
        return replace(self, scale=self.scale * c)

    def __call__(self, t: ArrayLike) -> NDArray:
        t = np.asarray(t, dtype=float)
        out = self.func(t)
        return out * self.scale if self.scale != 1.0 else out


_REGISTRY: dict[tuple[str, str], KernelSpec] = {
    ("K", "box"): KernelSpec("K", "box", _box, h6_compliant=True),
    ("K", "quadshift"): KernelSpec("K", "quadshift", _quadshift, h6_compliant=True),
    ("K", "epanechnikov"): KernelSpec("K", "epanechnikov", _epan_half, h6_compliant=False),
    ("H", "gaussian"): KernelSpec("H", "gaussian", _gaussian, h7_compliant=True),
    ("H", "epanechnikov"): KernelSpec("H", "epanechnikov", _epan, h7_compliant=True),
}


def get_kernel(role: Role, name: str) -> KernelSpec:
    try:
        return _REGISTRY[(role, name)]
    except KeyError:
        names = sorted(n for r, n in _REGISTRY if r == role)
        raise ConfigError(f"unknown {role} kernel {name!r}; choose from {names}") from None


def kernel_names(role: Role) -> list[str]:
    return sorted(n for r, n in _REGISTRY if r == role)


def eval_k(spec: KernelSpec, t: ArrayLike) -> NDArray:
    if spec.role != "K":
        raise ConfigError(f"{spec.name} is not a K-role kernel")
    return spec(t)


def eval_h(spec: KernelSpec, t: ArrayLike) -> NDArray:
    if spec.role != "H":
        raise ConfigError(f"{spec.name} is not an H-role kernel")
    return spec(t)


@dataclass
class ComplianceReport:
    kernel: str
    role: Role
    checks: dict[str, bool]
    details: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def __str__(self) -> str:
        lines = [f"{self.role}-kernel {self.kernel}: {'pass' if self.passed else 'fail'}"]
        lines += [f"  {k}: {'pass' if v else 'fail'}" for k, v in self.checks.items()]
        lines += [f"  {k} = {v:.10g}" for k, v in self.details.items()]
        return "\n".join(lines)


def check_compliance(spec: KernelSpec, n_grid: int = 10_000) -> ComplianceReport:
    """Numerically check the support/bound condition (K) or density conditions (H)."""
    if spec.role == "K":
        inside = (np.arange(n_grid) + 0.5) / n_grid
        outside = np.concatenate([-np.geomspace(1e-12, 10, 50), 1 + np.geomspace(1e-12, 10, 50), [1.0]])
        vals = spec(inside)
        inf, sup = float(vals.min()), float(vals.max())
        checks = {
            "support in [0, 1)": bool(np.all(spec(outside) == 0)),
            "nonnegative": bool(np.all(vals >= 0)),
            # the infimum over the open interval is approached at its edges
            "bounded away from 0": min(inf, float(spec(np.nextafter(1.0, 0.0)))) > 1e-3 * max(sup, 1e-300),
            "bounded above": bool(np.isfinite(sup)),
        }
        return ComplianceReport(spec.name, "K", checks, {"inf": inf, "sup": sup})

    def quad(f):
        # split at +-1 so compactly supported kernels have smooth pieces
        pieces = [(-np.inf, -1.0), (-1.0, 1.0), (1.0, np.inf)]
        return sum(
            integrate.quad(f, a, b, limit=200, epsabs=1e-13, epsrel=1e-12)[0] for a, b in pieces
        )

    mass = quad(lambda t: float(spec(t)))
    m1 = quad(lambda t: abs(t) * float(spec(t)))
    m2 = quad(lambda t: t * t * float(spec(t)))
    probe = np.linspace(-10, 10, 20_001)
    checks = {
        "integrates to 1": abs(mass - 1.0) < 1e-6,
        "nonnegative": bool(np.all(spec(probe) >= 0)),
        "finite |t| moment": bool(np.isfinite(m1)),
        "finite t^2 moment": bool(np.isfinite(m2)),
        "symmetric": bool(np.allclose(spec(probe), spec(-probe), rtol=0, atol=1e-15)),
    }
    return ComplianceReport(spec.name, "H", checks, {"integral": mass, "moment1": m1, "moment2": m2})
