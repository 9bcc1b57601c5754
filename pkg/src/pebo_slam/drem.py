"""Linear regressors for the virtual-frame landmarks, Kreisselmeier filtering
and DREM mixing.

All states carry a leading landmark axis: ``q`` is ``(n, 3)``, ``pi`` and
``phi`` are ``(n, 3, 3)``. A single landmark is just ``n == 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extension import VirtualPose
from .manifold import adjugate3, det3, projector


@dataclass(frozen=True)
class LreSample:
    q: np.ndarray
    pi: np.ndarray


@dataclass(frozen=True)
class KelreState:
    qe: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray

    @classmethod
    def zeros(cls, n: int, alpha=5.0) -> "KelreState":
        alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (n,)).copy()
        if np.any(alpha <= 0):
            raise ValueError("filter poles must be positive")
        return cls(np.zeros((n, 3)), np.zeros((n, 3, 3)), alpha)


@dataclass(frozen=True)
class ScalarRegressor:
    bigY: np.ndarray
    delta: np.ndarray


def make_lre(ext: VirtualPose, y) -> LreSample:
    """``q_i = Pi_{Q y_i} xi`` and ``Pi_{Q y_i}``, which satisfy ``q_i = Pi z_i^v``."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if np.any(np.abs(np.linalg.norm(y, axis=-1) - 1.0) > 1e-6):
        raise ValueError("bearings must be unit vectors")
    pi = projector(y @ ext.q.T)
    return LreSample(pi @ ext.xi, pi)


def kelre_step(s: KelreState, sample: LreSample, dt: float) -> KelreState:
    """Exact zero-order-hold step of the two first-order filters.

    Each state moves to ``a * state + (1 - a) * input`` with
    ``a = exp(-alpha dt)``, a convex combination, so ``phi`` stays PSD with
    eigenvalues in ``[0, 1]`` for any ``dt``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    a = np.exp(-s.alpha * dt)
    b = -np.expm1(-s.alpha * dt)
    pit = np.swapaxes(sample.pi, -1, -2)
    u_q = np.einsum("nij,nj->ni", pit, sample.q)
    u_phi = pit @ sample.pi
    qe = a[:, None] * s.qe + b[:, None] * u_q
    phi = a[:, None, None] * s.phi + b[:, None, None] * u_phi
    return KelreState(qe, phi, s.alpha)


def drem_mix(s: KelreState) -> ScalarRegressor:
    """``Y = adj(phi) qe`` and ``delta = det(phi)``, clamped at zero.

    The clamp only removes round-off negatives; ``phi`` is PSD.
    """
    big_y = np.einsum("nij,nj->ni", adjugate3(s.phi), s.qe)
    delta = np.maximum(det3(s.phi), 0.0)
    return ScalarRegressor(big_y, delta)
