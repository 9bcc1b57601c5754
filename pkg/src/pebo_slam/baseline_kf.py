"""Robocentric linear time-varying Kalman filter used as the comparison baseline.

Each landmark is tracked in the body frame, ``z^B = R^T (z - x)``, whose
dynamics ``z^B' = -Omega x z^B - v`` are linear in the state given the
measured twist. A bearing ``y`` enters as the implicit linear measurement
``Pi_y z^B = 0``. Observability of this LTV system needs persistent motion
relative to the landmark; once the robot stops, the along-bearing component
is no longer corrected.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .manifold import _I3, Twist, adjugate3, det3, exp_and_jacobian, projector

log = logging.getLogger(__name__)


class CovarianceCollapse(FloatingPointError):
    pass


@dataclass(frozen=True)
class BodyLandmarkState:
    zb_hat: np.ndarray
    cov: np.ndarray
    q_proc: float = 1e-4
    r_meas: float = 1e-2
    p0: float = 10.0
    resets: int = 0

    @classmethod
    def start(cls, n: int, zb_hat0=None, p0=10.0, q_proc=1e-4, r_meas=1e-2):
        if min(p0, q_proc, r_meas) <= 0:
            raise ValueError("noise parameters must be positive")
        zb = np.zeros((n, 3)) if zb_hat0 is None else np.asarray(zb_hat0, dtype=float).copy()
        cov = np.broadcast_to(p0 * np.eye(3), (n, 3, 3)).copy()
        return cls(zb, cov, q_proc, r_meas, p0)


def kf_update(s: BodyLandmarkState, y) -> BodyLandmarkState:
    """Measurement update with ``H = Pi_y`` and zero pseudo-measurement."""
    h = projector(np.asarray(y, dtype=float))
    p = s.cov
    innov = -np.einsum("nij,nj->ni", h, s.zb_hat)
    S = h @ p @ h + s.r_meas * _I3
    # K = P H^T S^-1 with H symmetric; S >= r_meas I so the cofactor inverse is safe
    s_inv = adjugate3(S) / det3(S)[:, None, None]
    k = p @ h @ s_inv
    zb = s.zb_hat + np.einsum("nij,nj->ni", k, innov)
    ikh = _I3 - k @ h
    cov = ikh @ p @ np.swapaxes(ikh, -1, -2) + s.r_meas * (k @ np.swapaxes(k, -1, -2))
    cov = 0.5 * (cov + np.swapaxes(cov, -1, -2))
    return BodyLandmarkState(zb, cov, s.q_proc, s.r_meas, s.p0, s.resets)


def kf_predict(s: BodyLandmarkState, u: Twist, dt: float) -> BodyLandmarkState:
    """Exact propagation for a twist held constant over ``dt``.

    ``z^B(t + dt) = E^T (z^B(t) - J v dt)`` with ``E = exp(Omega dt)`` and
    ``J`` the left Jacobian.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    e, j = exp_and_jacobian(u.omega * dt)
    f = e.T
    shift = j @ u.vel * dt
    zb = (s.zb_hat - shift) @ f.T
    cov = f @ s.cov @ f.T + (s.q_proc * dt) * _I3
    return BodyLandmarkState(zb, cov, s.q_proc, s.r_meas, s.p0, s.resets)


def _check_cov(s: BodyLandmarkState) -> BodyLandmarkState:
    try:
        np.linalg.cholesky(s.cov)
        return s
    except np.linalg.LinAlgError:
        pass
    eig = np.linalg.eigvalsh(s.cov).min(axis=-1)
    bad = eig <= 0
    log.warning("covariance collapse on landmarks %s; resetting to prior", np.flatnonzero(bad))
    cov = s.cov.copy()
    cov[bad] = 10.0 * s.p0 * np.eye(3)
    return replace(s, cov=cov, resets=s.resets + 1)


def kf_step(s: BodyLandmarkState, u: Twist, y, dt: float, strict: bool = False):
    """Update with the bearing at ``t``, then propagate to ``t + dt``.

    With ``strict`` a non-positive-definite covariance raises
    ``CovarianceCollapse`` instead of being reset to an inflated prior.
    """
    out = kf_predict(kf_update(s, y), u, dt)
    if strict:
        try:
            np.linalg.cholesky(out.cov)
        except np.linalg.LinAlgError as exc:
            raise CovarianceCollapse("covariance lost positive definiteness") from exc
        return out
    return _check_cov(out)
