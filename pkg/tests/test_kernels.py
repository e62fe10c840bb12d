import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from condmode.core import ConfigError
from condmode.kernels import check_compliance, eval_h, eval_k, get_kernel, kernel_names

BOX = get_kernel("K", "box")
QUAD = get_kernel("K", "quadshift")
EPAN_K = get_kernel("K", "epanechnikov")
GAUSS = get_kernel("H", "gaussian")
EPAN_H = get_kernel("H", "epanechnikov")


def test_k_values():
    assert eval_k(BOX, 0.5) == 1.0
    assert eval_k(BOX, 1.2) == 0.0
    assert eval_k(BOX, 1.0) == 0.0
    assert eval_k(BOX, 0.0) == 1.0
    assert eval_k(QUAD, 0.0) == 1.0
    assert eval_k(QUAD, 0.5) == pytest.approx(0.875)
    assert eval_k(EPAN_K, 0.0) == 0.75


def test_h_values():
    assert eval_h(GAUSS, 0.0) == pytest.approx(0.3989422804, abs=1e-10)
    assert eval_h(EPAN_H, 0.0) == 0.75
    assert eval_h(GAUSS, 1.3) == eval_h(GAUSS, -1.3)
    assert eval_h(EPAN_H, 1.5) == 0.0


def test_role_mismatch_is_rejected():
    with pytest.raises(ConfigError):
        eval_k(GAUSS, 0.1)
    with pytest.raises(ConfigError):
        eval_h(BOX, 0.1)
    with pytest.raises(ConfigError):
        get_kernel("K", "gaussian")


def test_registry_names():
    assert kernel_names("K") == ["box", "epanechnikov", "quadshift"]
    assert kernel_names("H") == ["epanechnikov", "gaussian"]


@pytest.mark.parametrize("name", ["box", "quadshift", "epanechnikov"])
@given(t=st.floats(-1e6, 1e6, allow_nan=False))
def test_k_support_and_sign(name, t):
    k = get_kernel("K", name)
    v = float(eval_k(k, t))
    assert v >= 0
    if t < 0 or t >= 1:
        assert v == 0.0


@pytest.mark.parametrize("name", ["gaussian", "epanechnikov"])
@given(t=st.floats(-1e6, 1e6, allow_nan=False))
def test_h_nonnegative(name, t):
    assert float(eval_h(get_kernel("H", name), t)) >= 0


def test_compliance_flags():
    box = check_compliance(BOX)
    assert box.passed and box.details["inf"] == box.details["sup"] == 1.0
    assert check_compliance(QUAD).passed
    epan = check_compliance(EPAN_K)
    assert not epan.passed and not epan.checks["bounded away from 0"]
    assert EPAN_K.h6_compliant is False and BOX.h6_compliant and QUAD.h6_compliant


@pytest.mark.parametrize("h", [GAUSS, EPAN_H])
def test_h_integrates_to_one(h):
    rep = check_compliance(h)
    assert rep.passed
    assert abs(rep.details["integral"] - 1.0) < 1e-6
    # independent oracle: fixed-interval quadrature on [-8, 8]
    oracle = integrate.quad(lambda t: float(h(t)), -8, 8, points=[-1, 0, 1], limit=200)[0]
    assert oracle == pytest.approx(1.0, abs=1e-6)


def test_h_moments():
    assert check_compliance(GAUSS).details["moment2"] == pytest.approx(1.0, abs=1e-8)
    assert check_compliance(GAUSS).details["moment1"] == pytest.approx(math.sqrt(2 / math.pi), abs=1e-8)
    assert check_compliance(EPAN_H).details["moment2"] == pytest.approx(0.2, abs=1e-10)


def test_scaled_kernel():
    k = BOX.scaled(3.0)
    assert eval_k(k, 0.2) == 3.0 and eval_k(k, 1.0) == 0.0
    with pytest.raises(ConfigError):
        BOX.scaled(0.0)


def test_vectorized_evaluation():
    t = np.array([-0.1, 0.0, 0.5, 0.999, 1.0])
    np.testing.assert_array_equal(eval_k(BOX, t), [0, 1, 1, 1, 0])
