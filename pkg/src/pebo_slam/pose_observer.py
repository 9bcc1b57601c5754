"""Localization from the virtual-frame landmark estimates.

The inertial frame is pinned by a pre-selected initial pose ``X_* = T(R_*, x_*)``.
With it the offset rotation is ``Q_c = Q(0) R_*^T``, and each localization
landmark satisfies the measurable regression

    Pi_{Q y_j} Q_c z_j = Pi_{Q y_j} (xi - xi(0) + Q_c x_*)

Integrating both sides over ``[0, T_*]`` gives ``ybar_j = phibar_j z_j``, solved
online by a gradient flow for ``zbar_j``. The attitude offset ``Qc_hat`` is
then aligned by matching difference vectors of ``zbar`` (inertial) against
those of ``zv_hat`` (virtual), and the position follows from the extension.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .extension import VirtualPose
from .manifold import _I3, Twist, adjugate3, det3, exp_so3, nearest_rotation, projector

log = logging.getLogger(__name__)

REORTHO_EVERY = 1000


@dataclass(frozen=True)
class BarFilterBank:
    zbar: np.ndarray
    ybar: np.ndarray
    phibar: np.ndarray
    rho: np.ndarray
    t_star: float
    r_star: np.ndarray
    x_star: np.ndarray
    frozen: bool = False
    # (dt, inverse of the implicit-Euler matrix, constant forcing) once frozen
    frozen_gain: tuple | None = None

    @classmethod
    def start(cls, n_loc: int, r_star, x_star, t_star=12.0, rho=1.0, zbar0=None):
        rho = np.broadcast_to(np.asarray(rho, dtype=float), (n_loc,)).copy()
        if np.any(rho <= 0) or t_star <= 0:
            raise ValueError("rho and t_star must be positive")
        zbar = np.zeros((n_loc, 3)) if zbar0 is None else np.asarray(zbar0, dtype=float).copy()
        return cls(
            zbar,
            np.zeros((n_loc, 3)),
            np.zeros((n_loc, 3, 3)),
            rho,
            float(t_star),
            np.asarray(r_star, dtype=float).reshape(3, 3),
            np.asarray(x_star, dtype=float).reshape(3),
        )

    @property
    def n_loc(self) -> int:
        return self.zbar.shape[0]


@dataclass(frozen=True)
class PoseEstimate:
    qc_hat: np.ndarray
    x_hat: np.ndarray
    k: np.ndarray
    sigma: np.ndarray
    steps: int = 0

    @classmethod
    def start(cls, n_loc: int, qc_hat0=None, x_hat0=None, k=1.0, sigma=1.0):
        k = np.broadcast_to(np.asarray(k, dtype=float), (n_loc - 1,)).copy()
        sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n_loc,)).copy()
        if np.any(k <= 0) or np.any(sigma <= 0):
            raise ValueError("k and sigma must be positive")
        qc = np.eye(3) if qc_hat0 is None else np.asarray(qc_hat0, dtype=float).reshape(3, 3)
        x = np.zeros(3) if x_hat0 is None else np.asarray(x_hat0, dtype=float).reshape(3)
        return cls(qc.copy(), x.copy(), k, sigma)

    def attitude(self, ext: VirtualPose):
        """``R_hat = Qc_hat^T Q``."""
        return self.qc_hat.T @ ext.q


def bar_filter_step(bank: BarFilterBank, ext: VirtualPose, y, t: float, dt: float):
    if dt <= 0:
        raise ValueError("dt must be positive")
    ybar, phibar, frozen = bank.ybar, bank.phibar, bank.frozen
    if t + 0.5 * dt <= bank.t_star:
        n = bank.n_loc
        pi = projector(np.asarray(y, dtype=float)[:n] @ ext.q.T)
        qc_star = ext.q0 @ bank.r_star.T
        drive = ext.xi - ext.xi0 + qc_star @ bank.x_star
        ybar = ybar + dt * (pi @ drive)
        phibar = phibar + dt * (pi @ qc_star)
    elif not frozen:
        frozen = True
        dets = np.linalg.det(np.swapaxes(phibar, -1, -2) @ phibar)
        for j in np.flatnonzero(dets < 1e-9):
            log.warning("bar filter %d frozen with near-singular regressor (det %.3g)", j, dets[j])

    gain = bank.frozen_gain if frozen else None
    if gain is None or gain[0] != dt:
        gain = (dt, *_implicit_gain(phibar, ybar, bank.rho * dt))
    zbar = np.einsum("nij,nj->ni", gain[1], bank.zbar + gain[2])
    return BarFilterBank(zbar, ybar, phibar, bank.rho, bank.t_star, bank.r_star, bank.x_star,
                         frozen, gain if frozen else None)


def _implicit_gain(phibar, ybar, g):
    """Implicit Euler on ``zbar' = rho M^T (ybar - M zbar)``:
    ``zbar+ = (I + g M^T M)^-1 (zbar + g M^T ybar)``."""
    mt = np.swapaxes(phibar, -1, -2)
    lhs = _I3 + g[:, None, None] * (mt @ phibar)
    inv = adjugate3(lhs) / det3(lhs)[:, None, None]
    return inv, g[:, None] * np.einsum("nij,nj->ni", mt, ybar)


def _cross(a, b):
    return np.stack([
        a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1],
        a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2],
        a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0],
    ], axis=1)


def visual_innovation(p: PoseEstimate, bank: BarFilterBank, zv_hats):
    """``w_vis = sum_j k_j rv_hat_j x (Qc_hat rbar_j)``."""
    n = bank.n_loc
    rv = np.diff(np.asarray(zv_hats, dtype=float)[:n], axis=0)
    rbar = np.diff(bank.zbar, axis=0)
    return (p.k[:, None] * _cross(rv, rbar @ p.qc_hat.T)).sum(axis=0)


def attitude_step(p: PoseEstimate, bank: BarFilterBank, zv_hats, ext: VirtualPose, dt: float):
    w = visual_innovation(p, bank, zv_hats)
    qc = exp_so3(-w * dt) @ p.qc_hat
    steps = p.steps + 1
    if steps % REORTHO_EVERY == 0:
        qc = nearest_rotation(qc)
    return PoseEstimate(qc, p.x_hat, p.k, p.sigma, steps)


def position_step(p: PoseEstimate, bank: BarFilterBank, zv_hats, ext: VirtualPose,
                  u: Twist, dt: float):
    n = bank.n_loc
    rel = (np.asarray(zv_hats, dtype=float)[:n] - ext.xi) @ p.qc_hat
    innov = bank.zbar - p.x_hat - rel
    xdot = p.attitude(ext) @ u.vel + (p.sigma[:, None] * innov).sum(axis=0)
    return PoseEstimate(p.qc_hat, p.x_hat + dt * xdot, p.k, p.sigma, p.steps)


def pose_step(p: PoseEstimate, bank: BarFilterBank, zv_hats, ext: VirtualPose,
              u: Twist, dt: float) -> PoseEstimate:
    """Explicit step of position and attitude from the same pre-step state."""
    moved = position_step(p, bank, zv_hats, ext, u, dt)
    return attitude_step(moved, bank, zv_hats, ext, dt)


def inertial_landmarks(p: PoseEstimate, zv_hats, ext: VirtualPose):
    """``z_hat_i = Qc_hat^T (zv_hat_i - xi) + x_hat``."""
    return (np.asarray(zv_hats, dtype=float) - ext.xi) @ p.qc_hat + p.x_hat
