import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pebo_slam import oracles
from pebo_slam.baseline_kf import (
    BodyLandmarkState,
    CovarianceCollapse,
    kf_predict,
    kf_step,
    kf_update,
)
from pebo_slam.manifold import Pose, Twist, projector, rotz
from pebo_slam.scenario import DEFAULT_LANDMARKS
from pebo_slam.simulator import LandmarkField, SimState, bearings, step_true, stop_profile

Z = np.array(DEFAULT_LANDMARKS)
X0 = Pose(rotz(math.pi / 6), [1.0, 1.0, 2.0])


def test_true_state_has_zero_innovation():
    zb = oracles.body_landmarks(X0, Z)
    y = bearings(SimState(0.0, X0), LandmarkField(Z))
    assert np.abs(np.einsum("nij,nj->ni", projector(y), zb)).max() < 1e-14
    s = BodyLandmarkState.start(6, zb_hat0=zb)
    assert np.abs(kf_update(s, y).zb_hat - zb).max() < 1e-14


def test_predict_tracks_body_frame_exactly():
    prof = stop_profile([1.0, 0, 0], [0, 0, -0.4], 12.0, 30.0)
    sim = SimState(0.0, X0)
    s = BodyLandmarkState.start(6, zb_hat0=oracles.body_landmarks(X0, Z))
    for _ in range(500):
        u = prof.twist_at(sim.t + 0.005)
        s = kf_predict(s, u, 0.01)
        sim = step_true(sim, prof, 0.01)
    assert np.abs(s.zb_hat - oracles.body_landmarks(sim.pose, Z)).max() < 1e-10


def test_static_bearing_direction_never_contracts():
    y = np.array([[0.0, 0.6, 0.8]])
    s = BodyLandmarkState.start(1)
    along = [y[0] @ s.cov[0] @ y[0]]
    for _ in range(300):
        s = kf_step(s, Twist(), y, 0.01)
        along.append(y[0] @ s.cov[0] @ y[0])
    assert all(b >= a for a, b in zip(along, along[1:]))
    perp = np.array([1.0, 0, 0])
    assert perp @ s.cov[0] @ perp < 0.05


def test_moving_robot_converges():
    prof = stop_profile([1.0, 0, 0], [0, 0, -0.4], 12.0, 12.0)
    sim = SimState(0.0, X0)
    lm = LandmarkField(Z)
    s = BodyLandmarkState.start(6)
    dt = 0.01
    for _ in range(1200):
        y = bearings(sim, lm)
        s = kf_step(s, prof.twist_at(sim.t + dt / 2), y, dt)
        sim = step_true(sim, prof, dt)
    err = np.linalg.norm(s.zb_hat - oracles.body_landmarks(sim.pose, Z), axis=1)
    assert err.max() < 0.05


@settings(max_examples=30, deadline=None)
@given(arrays(float, (5, 3), elements=st.floats(-1, 1)).filter(
    lambda a: np.all(np.linalg.norm(a, axis=1) > 0.1)))
def test_covariance_stays_symmetric_pd(ys):
    ys = ys / np.linalg.norm(ys, axis=1)[:, None]
    s = BodyLandmarkState.start(1)
    for y in ys:
        s = kf_step(s, Twist([0.1, 0, -0.2], [0.5, 0, 0]), y[None], 0.05, strict=True)
        assert np.abs(s.cov - np.swapaxes(s.cov, -1, -2)).max() < 1e-12 * np.abs(s.cov).max()
        assert np.linalg.eigvalsh(s.cov).min() > 0


def test_strict_mode_raises_on_collapse():
    s = BodyLandmarkState.start(1)
    bad = BodyLandmarkState(s.zb_hat, -np.eye(3)[None] * 1e3, s.q_proc, s.r_meas, s.p0)
    with pytest.raises(CovarianceCollapse):
        kf_step(bad, Twist(), np.array([[0.0, 0, 1.0]]), 0.01, strict=True)
    reset = kf_step(bad, Twist(), np.array([[0.0, 0, 1.0]]), 0.01)
    assert reset.resets == 1
    assert np.allclose(reset.cov[0], 10 * s.p0 * np.eye(3))


def test_parameter_guards():
    with pytest.raises(ValueError):
        BodyLandmarkState.start(2, r_meas=0.0)
    with pytest.raises(ValueError):
        kf_predict(BodyLandmarkState.start(2), Twist(), 0.0)
