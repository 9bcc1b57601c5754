import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pebo_slam.drem import ScalarRegressor
from pebo_slam.landmark_observer import (
    IntegralRegressor,
    LandmarkEstimatorState,
    _decay_factor,
    effective_gain,
    landmark_step,
    mixed_residual,
)

ZV = np.array([[1.0, -2.0, 0.5], [3.0, 0.2, -1.0]])
deltas = st.lists(st.floats(0, 2), min_size=5, max_size=40)


def exact(delta, zv=ZV):
    d = np.asarray(delta, dtype=float)
    return ScalarRegressor(d[:, None] * zv, d)


def test_sec4_gains():
    s = LandmarkEstimatorState.start(6)
    assert np.array_equal(s.gamma, np.full(6, 100.0)) and np.array_equal(s.k_i, np.full(6, 20.0))
    assert np.array_equal(s.omega, np.ones(6))
    with pytest.raises(ValueError):
        LandmarkEstimatorState.start(2, gamma=0.0)


def test_no_excitation_freezes_estimate():
    s = LandmarkEstimatorState.start(2, zv_hat0=[[1, 2, 3], [4, 5, 6.0]])
    r = ScalarRegressor(np.zeros((2, 3)), np.zeros(2))
    for _ in range(100):
        s = landmark_step(s, r, 0.01)
    assert np.array_equal(s.omega, np.ones(2))
    assert np.array_equal(effective_gain(s, r), np.zeros(2))
    assert np.array_equal(s.zv_hat, [[1, 2, 3], [4, 5, 6.0]])


def test_effective_gain_arithmetic():
    s = LandmarkEstimatorState(np.zeros((1, 3)), np.zeros((1, 3)), np.array([0.5]),
                               np.zeros((1, 3)), np.array([100.0]), np.array([20.0]))
    r = ScalarRegressor(np.zeros((1, 3)), np.array([0.1]))
    assert effective_gain(s, r)[0] == pytest.approx(10.1, abs=1e-12)


def test_residual_zero_without_history():
    s = LandmarkEstimatorState.start(2)
    r = ScalarRegressor(np.zeros((2, 3)), np.zeros(2))
    assert np.array_equal(mixed_residual(s, r), np.zeros((2, 3)))


def test_constant_gain_closed_form():
    # omega = 0 and delta = 0 give a constant delta_e = k_i
    gamma, k_i, dt = 100.0, 0.3, 0.01
    s = LandmarkEstimatorState(ZV.copy(), np.zeros((2, 3)), np.zeros(2), np.zeros((2, 3)),
                               np.full(2, gamma), np.full(2, k_i))
    r = ScalarRegressor(np.zeros((2, 3)), np.zeros(2))
    for k in range(1, 201):
        s = landmark_step(s, r, dt)
        expected = -ZV * np.exp(-gamma * k_i**2 * k * dt)
        assert np.abs((s.zv_hat - ZV) - expected).max() < 1e-12


def test_decay_factor_limits():
    assert _decay_factor(0.0) == 1.0
    assert _decay_factor(1e-14) == pytest.approx(1.0)
    assert _decay_factor(2.0) == pytest.approx((1 - np.exp(-2.0)) / 2.0)
    assert _decay_factor(1e6) == pytest.approx(1e-6)


@settings(max_examples=40)
@given(deltas, arrays(float, (2, 3), elements=st.floats(-10, 10)), st.floats(1e-3, 0.1))
def test_integral_identity_and_omega(ds, chi0, dt):
    """chi - omega chi0 = (1 - omega) z^v and omega = exp(-int delta^2)."""
    s = LandmarkEstimatorState.start(2, chi0=chi0)
    energy = 0.0
    for d in ds:
        s = landmark_step(s, exact([d, 0.5 * d]), dt)
        energy += d * d * dt
    lhs = s.chi - s.omega[:, None] * s.chi0
    assert np.abs(lhs - (1 - s.omega)[:, None] * ZV).max() < 1e-9
    assert s.omega[0] == pytest.approx(np.exp(-energy), rel=1e-12, abs=1e-300)
    assert np.all((0 <= s.omega) & (s.omega <= 1))


@settings(max_examples=40)
@given(deltas, arrays(float, (2, 3), elements=st.floats(-10, 10)), st.floats(1e-3, 0.1))
def test_componentwise_monotone(ds, zv0, dt):
    s = LandmarkEstimatorState.start(2, zv_hat0=zv0)
    err = np.abs(s.zv_hat - ZV)
    for d in ds:
        s = landmark_step(s, exact([d, d * d]), dt)
        new = np.abs(s.zv_hat - ZV)
        assert np.all(new <= err + 1e-12)
        err = new


def test_excitation_then_loss_still_converges():
    s = LandmarkEstimatorState.start(2, zv_hat0=np.full((2, 3), 5.0))
    for _ in range(20):
        s = landmark_step(s, exact([0.2, 0.2]), 0.01)
    mid = np.abs(s.zv_hat - ZV).max()
    for _ in range(2000):
        s = landmark_step(s, exact([0.0, 0.0]), 0.01)
    assert np.abs(s.zv_hat - ZV).max() < 1e-6 < mid


def test_batched_initial_conditions_match_single():
    inits = np.random.default_rng(0).uniform(-10, 10, (4, 2, 3))
    batch = LandmarkEstimatorState.start(2, zv_hat0=inits)
    singles = [LandmarkEstimatorState.start(2, zv_hat0=z) for z in inits]
    for d in [0.0, 0.3, 0.7, 0.1]:
        r = exact([d, 2 * d])
        batch = landmark_step(batch, r, 0.02)
        singles = [landmark_step(s, r, 0.02) for s in singles]
    for b, s in zip(batch.zv_hat, singles):
        assert np.array_equal(b, s.zv_hat)


def test_step_guards():
    s = LandmarkEstimatorState.start(2)
    with pytest.raises(ValueError):
        landmark_step(s, exact([0.1, 0.1]), 0.0)
    with pytest.raises(ValueError):
        landmark_step(s, ScalarRegressor(np.zeros((2, 3)), np.array([-1.0, 0.0])), 0.01)


def test_integral_regressor():
    ir = IntegralRegressor.zeros(2)
    assert np.array_equal(ir.estimate(), np.zeros((2, 3)))
    for d in [0.1, 0.2, 0.0]:
        ir = ir.step(exact([d, 0.0]), 0.5)
    est = ir.estimate()
    assert np.allclose(est[0], ZV[0]) and np.array_equal(est[1], np.zeros(3))
