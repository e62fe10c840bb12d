import math

import numpy as np
import pytest
from hypothesis import strategies as st

from condmode.core import Curve, FunctionalSample, ModeSearchInterval
from condmode.estimator import EstimatorConfig
from condmode.kernels import get_kernel
from condmode.semimetrics import SemiMetricSpec

GRID = np.linspace(0.0, 1.0, 21)


def make_sample(values, responses, times=None):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    times = np.linspace(0.0, 1.0, values.shape[1]) if times is None else np.asarray(times, dtype=float)
    return FunctionalSample(tuple(Curve(times, v) for v in values), np.asarray(responses, dtype=float))


def random_sample(rng, n, T=21, spread=1.0):
    times = np.linspace(0.0, 1.0, T)
    a, b = rng.normal(size=(2, n)) * spread
    values = a[:, None] * np.sin(np.pi * times) + b[:, None] * times + 0.1 * rng.normal(size=(n, T))
    y = a + 0.3 * rng.normal(size=n)
    return make_sample(values, y, times)


def make_config(h_k=1.0, h_h=0.5, lower=-3.0, upper=3.0, M=201, k="box", h="gaussian", semimetric=None):
    return EstimatorConfig(
        semimetric=semimetric or SemiMetricSpec("l2"),
        k_kernel=get_kernel("K", k),
        h_kernel=get_kernel("H", h),
        h_k=h_k,
        h_h=h_h,
        interval=ModeSearchInterval(lower, upper, M),
    )


def naive_l2(u, v, times):
    total = 0.0
    for k in range(len(times) - 1):
        a = (u[k] - v[k]) ** 2
        b = (u[k + 1] - v[k + 1]) ** 2
        total += 0.5 * (a + b) * (times[k + 1] - times[k])
    return math.sqrt(total)


def naive_density(xvals, times, sample_vals, responses, h_k, h_h, y, kfun, hfun):
    """Two nested loops: kernel weights over curves, then the response kernel sum."""
    kv = []
    for xi in sample_vals:
        d = naive_l2(xvals, xi, times)
        kv.append(kfun(d / h_k) if d < h_k else 0.0)
    denom = sum(kv)
    if denom == 0:
        return 0.0
    num = 0.0
    for k_i, y_i in zip(kv, responses):
        num += k_i * hfun((y - y_i) / h_h)
    return num / denom / h_h


def gauss(t):
    return math.exp(-0.5 * t * t) / math.sqrt(2 * math.pi)


def box(t):
    return 1.0 if 0 <= t < 1 else 0.0


def quadshift(t):
    return 1.0 - t * t / 2 if 0 <= t < 1 else 0.0


def epan(t):
    return 0.75 * (1 - t * t) if abs(t) <= 1 else 0.0


@st.composite
def curve_pairs(draw, T=st.integers(min_value=4, max_value=30)):
    n = draw(T)
    elems = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
    steps = draw(st.lists(st.floats(min_value=1e-3, max_value=2.0), min_size=n - 1, max_size=n - 1))
    times = np.concatenate([[0.0], np.cumsum(steps)])
    u = draw(st.lists(elems, min_size=n, max_size=n))
    v = draw(st.lists(elems, min_size=n, max_size=n))
    return Curve(times, u), Curve(times, v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
