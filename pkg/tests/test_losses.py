import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridsplit.errors import ConfigError, GridSplitError
from gridsplit.losses import (
    LossConfig,
    bce_grad,
    bce_loss,
    grad_check,
    sigmoid,
    sigmoid_focal_grad,
    sigmoid_focal_loss,
)
from gridsplit.schedule import ScheduleConfig, cosine_lr


def test_sigmoid_stable_at_extremes():
    x = np.array([-1e4, -40.0, 0.0, 40.0, 1e4])
    s = sigmoid(x)
    assert np.all(np.isfinite(s))
    assert s[0] == 0.0 or s[0] < 1e-300
    assert s[2] == 0.5
    assert s[4] == 1.0 or s[4] > 1.0 - 1e-16


def test_bce_hand_values():
    # logit 0 against either label costs ln 2
    np.testing.assert_allclose(bce_loss(np.zeros(2), np.array([0.0, 1.0])), math.log(2.0))
    # certain & correct costs ~0 (clamp floors it near 1e-7)
    assert bce_loss(np.array(30.0), np.array(1.0)) < 1e-6
    # confident & wrong follows softplus while above the clamp
    want = math.log1p(math.exp(5.0))
    assert abs(float(bce_loss(np.array(-5.0), np.array(1.0))) - want) < 1e-9
    # far past the clamp the loss saturates at -ln(clamp)
    sat = float(bce_loss(np.array(-40.0), np.array(1.0)))
    assert abs(sat - (-math.log(1e-7))) < 1e-9


def test_bce_grad_is_sigmoid_minus_target():
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(bce_grad(x, np.ones(7)), sigmoid(x) - 1.0)


def test_focal_reduces_toward_bce_at_gamma_zero():
    cfg = LossConfig(alpha=0.5, gamma=0.0)
    x = np.linspace(-2, 2, 9)
    y = (x > 0).astype(float)
    np.testing.assert_allclose(sigmoid_focal_loss(x, y, cfg), 0.5 * bce_loss(x, y), atol=1e-12)
    np.testing.assert_allclose(sigmoid_focal_grad(x, y, cfg), 0.5 * bce_grad(x, y), atol=1e-9)


def test_focal_hand_value():
    # x=0, y=1: alpha * (1/2)^gamma * ln 2
    got = float(sigmoid_focal_loss(np.array(0.0), np.array(1.0)))
    assert abs(got - 0.25 * 0.25 * math.log(2.0)) < 1e-12


def test_focal_downweights_easy_examples():
    easy = float(sigmoid_focal_loss(np.array(5.0), np.array(1.0)))
    hard = float(sigmoid_focal_loss(np.array(-5.0), np.array(1.0)))
    assert easy < hard * 1e-4


@pytest.mark.parametrize("y", [0.0, 1.0])
def test_focal_grad_matches_central_differences(y):
    rng = np.random.default_rng(11)
    x = rng.normal(0.0, 3.0, size=16)
    target = np.full(16, y)

    def fn(t):
        return float(sigmoid_focal_loss(t, target).sum()), sigmoid_focal_grad(t, target)

    assert grad_check(fn, x) < 1e-6


def test_grad_check_flags_wrong_gradient():
    x = np.array([0.3, -0.7])

    def fn(t):
        return float((t**2).sum()), 2.0 * t + 0.5

    assert grad_check(fn, x) > 1e-2


def test_grad_check_validates_inputs():
    def fn(t):
        return float(t.sum()), np.ones_like(t)

    with pytest.raises(GridSplitError):
        grad_check(fn, np.zeros(3), eps=1e-8)

    def bad_shape(t):
        return float(t.sum()), np.ones(t.size + 1)

    with pytest.raises(GridSplitError):
        grad_check(bad_shape, np.zeros(3))


def test_loss_config_validation():
    with pytest.raises(GridSplitError):
        LossConfig(alpha=1.5)
    with pytest.raises(GridSplitError):
        LossConfig(gamma=-1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.sampled_from([0.0, 1.0]))
def test_focal_nonnegative_and_finite(x, y):
    v = float(sigmoid_focal_loss(np.array(x), np.array(y)))
    assert math.isfinite(v) and v >= 0.0


def test_cosine_schedule_shape():
    cfg = ScheduleConfig(eta_min=1e-4, eta_max=1e-1, t_max=10)
    lrs = [cosine_lr(t, cfg) for t in range(11)]
    assert lrs[0] == pytest.approx(1e-1)
    assert lrs[-1] == pytest.approx(1e-4)
    assert all(a >= b for a, b in zip(lrs, lrs[1:]))  # monotone decay
    assert lrs[5] == pytest.approx((1e-1 + 1e-4) / 2.0)


def test_cosine_schedule_validation():
    cfg = ScheduleConfig(eta_min=1e-4, eta_max=1e-1, t_max=10)
    with pytest.raises(ConfigError):
        cosine_lr(11, cfg)
    with pytest.raises(ConfigError):
        cosine_lr(-1, cfg)
    with pytest.raises(ConfigError):
        ScheduleConfig(eta_min=0.0, eta_max=1.0, t_max=5)
    with pytest.raises(ConfigError):
        ScheduleConfig(eta_min=1.0, eta_max=0.5, t_max=5)
    with pytest.raises(ConfigError):
        ScheduleConfig(eta_min=1e-3, eta_max=1e-2, t_max=0)
