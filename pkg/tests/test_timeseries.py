import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condmode.bandwidth import BandwidthGrid
from condmode.core import ConfigError, Curve, DataError, validate_sample
from condmode.estimator import mode_estimate
from condmode.timeseries import PathSlicingConfig, build_pairs, predict_next, slice_path
from conftest import gauss, make_config


def series(values, dt=1.0):
    values = np.asarray(values, dtype=float)
    return Curve(np.arange(len(values)) * dt, values)


def test_equal_blocks():
    sliced = slice_path(series(np.arange(50.0)), PathSlicingConfig(5))
    assert len(sliced) == 5 and all(len(s) == 10 for s in sliced)
    for i, seg in enumerate(sliced, start=1):
        assert seg.values[0] == (i - 1) * 10
    np.testing.assert_array_equal(sliced[3].times, np.arange(10.0))


def test_two_segments():
    sliced = slice_path(series([0, 1, 2, 3]), PathSlicingConfig(2))
    np.testing.assert_array_equal(sliced[0].values, [0, 1])
    np.testing.assert_array_equal(sliced[1].values, [2, 3])


def test_truncation_is_recorded():
    sliced = slice_path(series(np.arange(23.0)), PathSlicingConfig(4))
    assert sliced.truncated == 3 and sliced.samples_per_segment == 5
    assert sliced.metadata()["truncated_samples"] == 3


def test_too_short_path():
    with pytest.raises(DataError, match="too short"):
        slice_path(series(np.arange(9.0)), PathSlicingConfig(5))


def test_irregular_sampling_is_rejected():
    t = np.array([0, 1, 2, 3, 4.5, 5.0])
    with pytest.raises(DataError):
        slice_path(Curve(t, np.zeros(6)), PathSlicingConfig(2))


@given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=200), st.integers(2, 50), st.floats(1e-3, 10))
@settings(max_examples=200, deadline=None)
def test_round_trip(values, N, dt):
    N = min(N, len(values) // 2)
    path = series(values, dt)
    sliced = slice_path(path, PathSlicingConfig(N))
    back = sliced.concatenate()
    used = N * (len(values) // N)
    np.testing.assert_array_equal(back.values, path.values[:used])
    np.testing.assert_array_equal(back.times, path.times[:used])


def test_build_pairs_shapes_and_characteristics():
    segs = slice_path(series([0, 1, 2, 2, 3, 7]), PathSlicingConfig(2))
    s = build_pairs(segs, "endpoint")
    assert len(s) == 1 and s.responses[0] == 7
    np.testing.assert_array_equal(s.curves[0].values, [0, 1, 2])
    assert build_pairs(segs, "mean").responses[0] == 4.0
    assert build_pairs(segs, "max").responses[0] == 7.0
    assert build_pairs(segs, "integral").responses[0] == pytest.approx(0.5 * (2 + 3) + 0.5 * (3 + 7))
    assert validate_sample(s) == []


def test_mean_of_0_1_2():
    segs = slice_path(series([5, 5, 5, 0, 1, 2]), PathSlicingConfig(2))
    assert build_pairs(segs, "mean").responses[0] == 1.0


def test_centering_only_touches_curves():
    segs = slice_path(series([1, 2, 3, 10, 11, 12, 4, 5, 6]), PathSlicingConfig(3))
    s = build_pairs(segs, "endpoint", center=True)
    np.testing.assert_array_equal(s.curves[1].values, [-1, 0, 1])
    np.testing.assert_array_equal(s.responses, [12, 6])


def test_unknown_characteristic():
    with pytest.raises(ConfigError):
        PathSlicingConfig(3, "median")


@given(st.integers(0, 1000), st.integers(2, 12))
@settings(max_examples=50, deadline=None)
def test_pairs_are_valid(seed, N):
    rng = np.random.default_rng(seed)
    segs = slice_path(series(rng.normal(size=N * 7)), PathSlicingConfig(N))
    s = build_pairs(segs, "max")
    assert len(s) == N - 1 and validate_sample(s) == []


def test_constant_path_predicts_constant():
    c = 2.37
    cfg = make_config(h_k=0.5, h_h=0.2, lower=1.0, upper=4.0, M=61)
    rep = predict_next(series(np.full(60, c)), PathSlicingConfig(6), cfg)
    grid = cfg.interval.grid
    assert rep.prediction == grid[np.argmin(np.abs(grid - c))]
    assert rep.effective_n == 5 and rep.n_pairs == 5


def test_periodic_path_predicts_segment_endpoint():
    m, N = 25, 20
    dt = 0.04
    t = np.arange(m * N) * dt
    period = m * dt
    path = Curve(t, np.sin(2 * np.pi * t / period) + 0.3 * np.cos(4 * np.pi * t / period))
    cfg = make_config(h_k=0.1, h_h=0.1, lower=-1.5, upper=1.5, M=301)
    rep = predict_next(path, PathSlicingConfig(N, "endpoint"), cfg)
    # oracle: all segments coincide, so the density is one bump at the common endpoint
    s_end = (m - 1) * dt
    target = math.sin(2 * math.pi * s_end / period) + 0.3 * math.cos(4 * math.pi * s_end / period)
    grid = cfg.interval.grid
    brute = grid[np.argmax([gauss((y - target) / 0.1) for y in grid])]
    assert rep.prediction == brute
    assert abs(rep.prediction - target) <= cfg.interval.step


def test_single_pair_prediction():
    path = series([0.0, 0.1, 0.2, 1.0, 1.05, 1.3])
    cfg = make_config(h_k=5.0, h_h=0.05, lower=0.0, upper=2.0, M=201)
    rep = predict_next(path, PathSlicingConfig(2, "endpoint"), cfg)
    grid = cfg.interval.grid
    assert rep.n_pairs == 1 and rep.effective_n == 1
    assert rep.prediction == grid[np.argmin(np.abs(grid - 1.3))]


def test_empty_ball_prediction_is_flagged():
    rng = np.random.default_rng(1)
    cfg = make_config(h_k=1e-6, h_h=0.2, lower=-3, upper=3, M=61)
    rep = predict_next(series(rng.normal(size=40)), PathSlicingConfig(8), cfg)
    assert rep.flagged and rep.prediction == -3.0
    assert any("empty ball" in w for w in rep.warnings)


def test_prediction_matches_direct_mode_estimate():
    rng = np.random.default_rng(3)
    path = series(np.cumsum(rng.normal(size=300)) * 0.1)
    slicing = PathSlicingConfig(30, "mean")
    cfg = make_config(h_k=1.0, h_h=0.3, lower=-5, upper=5, M=201, k="quadshift")
    rep = predict_next(path, slicing, cfg)
    sliced = slice_path(path, slicing)
    est = mode_estimate(cfg, build_pairs(sliced, "mean"), sliced[-1])
    assert rep.prediction == est.theta_hat and rep.effective_n == est.effective_n


@pytest.mark.parametrize("shift", [-3.0, 0.5, 10.0])
def test_shift_equivariance(shift):
    rng = np.random.default_rng(7)
    path = series(np.sin(np.arange(240) * 0.3) + 0.2 * rng.normal(size=240))
    slicing = PathSlicingConfig(24, "endpoint")
    cfg = make_config(h_k=1.5, h_h=0.25, lower=-2.0, upper=2.0, M=401, k="quadshift")
    base = predict_next(path, slicing, cfg)
    moved_cfg = make_config(h_k=1.5, h_h=0.25, lower=-2.0 + shift, upper=2.0 + shift, M=401, k="quadshift")
    moved = predict_next(path.shifted(shift), PathSlicingConfig(24, "endpoint", center=True), moved_cfg)
    centered = predict_next(path, PathSlicingConfig(24, "endpoint", center=True), cfg)
    assert moved.prediction == pytest.approx(centered.prediction + shift, abs=1e-9)
    assert base.effective_n > 0


def test_prediction_with_cv():
    rng = np.random.default_rng(11)
    z = np.zeros(400)
    for i in range(1, 400):
        z[i] = 0.8 * z[i - 1] + rng.normal() * 0.3
    path = series(z)
    slicing = PathSlicingConfig(40, "endpoint")
    cfg = make_config(h_k=1.0, h_h=0.3, lower=-3, upper=3, M=121, k="quadshift")
    grid = BandwidthGrid((2, 4, 8), (0.1, 0.3), knn=True)
    rep = predict_next(path, slicing, cfg, bandwidth_grid=grid)
    assert rep.cv is not None and rep.knn_k in (2, 4, 8) and rep.h_h in (0.1, 0.3)
    assert rep.effective_n >= rep.knn_k
    js = rep.to_json()
    assert js["cv_selected"]["h_h"] == rep.h_h
