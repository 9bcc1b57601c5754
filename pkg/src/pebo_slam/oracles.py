"""Ground-truth quantities used only for evaluation and tests.

The estimators never import this module; the harness uses it to score runs.
"""
from __future__ import annotations

import numpy as np

from .extension import VirtualPose
from .manifold import Pose, pose_compose, pose_inverse


def oracle_Xc(x_true: Pose, x_ext: VirtualPose) -> Pose:
    """Constant offset ``X_e X^{-1}`` between virtual and true pose."""
    return pose_compose(x_ext.pose, pose_inverse(x_true))


def oracle_zv(x_true: Pose, x_ext: VirtualPose, z):
    """Landmark coordinates in the virtual frame, ``xi + Q R^T (z - x)``.

    ``z`` may be a single point or an ``(n, 3)`` array.
    """
    z = np.asarray(z, dtype=float)
    return x_ext.xi + (z - x_true.pos) @ (x_ext.q @ x_true.rot.T).T


def virtual_bearings(x_ext: VirtualPose, zv):
    d = np.asarray(zv, dtype=float) - x_ext.xi
    return (d @ x_ext.q) / np.linalg.norm(d, axis=-1, keepdims=True)


def body_landmarks(x_true: Pose, z):
    """Robocentric coordinates ``R^T (z - x)``."""
    return (np.asarray(z, dtype=float) - x_true.pos) @ x_true.rot
