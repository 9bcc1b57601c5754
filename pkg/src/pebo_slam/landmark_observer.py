"""Virtual-frame landmark observer driven by the DREM scalar regressors.

Besides the instantaneous regression ``Y = delta z``, the observer keeps an
integral-type regression ``chi - omega chi0 = (1 - omega) z`` built from the
excitation history, so the effective gain

    delta_e = delta + k_i (1 - omega)

stays bounded away from zero once the regressor has been excited over one
finite interval, even if excitation is lost afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .drem import ScalarRegressor


@dataclass(frozen=True)
class LandmarkEstimatorState:
    chi: np.ndarray
    chi0: np.ndarray
    omega: np.ndarray
    zv_hat: np.ndarray
    gamma: np.ndarray
    k_i: np.ndarray

    @classmethod
    def start(cls, n: int, gamma=100.0, k_i=20.0, chi0=None, zv_hat0=None):
        gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (n,)).copy()
        k_i = np.broadcast_to(np.asarray(k_i, dtype=float), (n,)).copy()
        if np.any(gamma <= 0) or np.any(k_i <= 0):
            raise ValueError("gamma and k_i must be positive")
        chi0 = np.zeros((n, 3)) if chi0 is None else np.broadcast_to(
            np.asarray(chi0, dtype=float), (n, 3)).copy()
        zv = np.zeros((n, 3)) if zv_hat0 is None else np.asarray(zv_hat0, dtype=float).copy()
        return cls(chi0.copy(), chi0, np.ones(n), zv, gamma, k_i)


def _decay_factor(u):
    """``(1 - exp(-u)) / u`` with the removable singularity at 0 filled in."""
    u = np.asarray(u, dtype=float)
    safe = np.where(u > 1e-12, u, 1.0)
    return np.where(u > 1e-12, -np.expm1(-safe) / safe, 1.0 - 0.5 * u)


def effective_gain(s: LandmarkEstimatorState, r: ScalarRegressor):
    return r.delta + s.k_i * (1.0 - s.omega)


def mixed_residual(s: LandmarkEstimatorState, r: ScalarRegressor):
    """``Y + k_i (chi - omega chi0) - delta_e zv_hat``; zero at the true ``z^v``."""
    de = effective_gain(s, r)
    lhs = r.bigY + s.k_i[:, None] * (s.chi - s.omega[:, None] * s.chi0)
    return lhs - de[..., None] * s.zv_hat


def landmark_step(s: LandmarkEstimatorState, r: ScalarRegressor, dt: float):
    """Advance ``chi``, ``omega`` and ``zv_hat`` over one step.

    Each of the three flows has the scalar-decay form ``x' = g (b - a x)``
    with ``a, g`` frozen over the step; it is integrated exactly as
    ``x + dt g (b - a x) (1 - exp(-g a dt)) / (g a dt)``, which is
    unconditionally stable for the stiff products ``gamma delta_e^2``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    d = r.delta
    if np.any(d < 0):
        raise ValueError("delta must be non-negative")
    de = effective_gain(s, r)

    d2 = d * d
    chi = s.chi + (dt * _decay_factor(d2 * dt) * d)[:, None] * (r.bigY - d[:, None] * s.chi)
    omega = s.omega * np.exp(-d2 * dt)

    b = r.bigY + s.k_i[:, None] * (s.chi - s.omega[:, None] * s.chi0)
    rate = s.gamma * de * de
    step = (dt * _decay_factor(rate * dt) * s.gamma * de)[..., None]
    zv_hat = s.zv_hat + step * (b - de[..., None] * s.zv_hat)
    return LandmarkEstimatorState(chi, s.chi0, omega, zv_hat, s.gamma, s.k_i)


@dataclass(frozen=True)
class IntegralRegressor:
    """Opt-in pure-integral alternative ``int Y = (int delta) z``.

    Kept as a diagnostic: both integrals grow without bound under
    persistent excitation.
    """

    int_y: np.ndarray
    int_delta: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "IntegralRegressor":
        return cls(np.zeros((n, 3)), np.zeros(n))

    def step(self, r: ScalarRegressor, dt: float) -> "IntegralRegressor":
        return IntegralRegressor(self.int_y + dt * r.bigY, self.int_delta + dt * r.delta)

    def estimate(self):
        d = self.int_delta[:, None]
        return np.where(d > 0, self.int_y / np.where(d > 0, d, 1.0), 0.0)
