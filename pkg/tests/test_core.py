import numpy as np
import pytest
from hypothesis import given, strategies as st

from condmode.core import (
    ConfigError,
    Curve,
    DataError,
    FunctionalSample,
    ModeSearchInterval,
    resample_curve,
    validate_sample,
)
from conftest import make_sample


def test_valid_sample_has_empty_report():
    s = make_sample(np.arange(9.0).reshape(3, 3), [1.0, 2.0, 3.0], times=[0, 0.5, 1])
    assert validate_sample(s) == []


def test_nan_value_is_reported_once_for_that_curve():
    vals = np.arange(9.0).reshape(3, 3)
    vals[2, 1] = np.nan
    report = validate_sample(make_sample(vals, [1.0, 2.0, 3.0]))
    assert len(report) == 1
    assert report[0].index == 2 and "non-finite" in report[0].rule


def test_grid_mismatch_is_reported():
    s = FunctionalSample((Curve([0, 1], [0, 1]), Curve([0, 0.5, 1], [0, 1, 2])), [0.0, 1.0])
    report = validate_sample(s)
    assert any(v.index == 1 and "grid" in v.rule for v in report)


@pytest.mark.parametrize(
    "sample, needle",
    [
        (FunctionalSample((), []), "empty"),
        (FunctionalSample((Curve([0, 1], [0, 1]),), [1.0, 2.0]), "count"),
        (FunctionalSample((Curve([0, 1], [0, 1]),), [np.inf]), "response"),
        (FunctionalSample((Curve([1, 0], [0, 1]),), [1.0]), "increasing"),
        (FunctionalSample((Curve([0.0], [0.0]),), [1.0]), "fewer than 2"),
        (FunctionalSample((Curve([0, 1, 2], [0, 1]),), [1.0]), "length mismatch"),
    ],
)
def test_each_invariant_is_reported(sample, needle):
    assert any(needle in v.rule for v in validate_sample(sample))


def test_resample_midpoint():
    c = resample_curve(Curve([0, 1], [0, 2]), [0, 0.5, 1])
    np.testing.assert_array_equal(c.values, [0, 1, 2])


def test_resample_between_knots():
    c = resample_curve(Curve([0, 1, 2], [0, 1, 4]), [1.5])
    assert c.values[0] == pytest.approx(2.5, abs=1e-15)


def test_resample_rejects_extrapolation():
    with pytest.raises(DataError, match="2.5"):
        resample_curve(Curve([0, 1, 2], [0, 1, 4]), [0.5, 2.5])


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40), st.integers(0, 2**31))
def test_resample_on_own_grid_is_identity(values, seed):
    rng = np.random.default_rng(seed)
    times = np.cumsum(rng.uniform(0.01, 1.0, len(values)))
    c = Curve(times, values)
    once = resample_curve(c, c.times)
    np.testing.assert_array_equal(once.values, c.values)
    np.testing.assert_array_equal(resample_curve(once, c.times).values, once.values)


def test_interval_invariants():
    with pytest.raises(ConfigError):
        ModeSearchInterval(1.0, 1.0)
    with pytest.raises(ConfigError):
        ModeSearchInterval(0.0, 1.0, 1)
    grid = ModeSearchInterval(-1.0, 1.0, 2).grid
    np.testing.assert_array_equal(grid, [-1.0, 1.0])


def test_curves_are_immutable():
    c = Curve([0, 1], [0, 1])
    with pytest.raises(ValueError):
        c.values[0] = 5.0
