"""Open-loop dynamic extension: a virtual robot driven by measured twists."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifold import Pose, Twist, is_rotation, se3_step


@dataclass(frozen=True)
class VirtualPose:
    """Virtual pose ``T(q, xi)`` plus the initial values it started from."""

    q: np.ndarray
    xi: np.ndarray
    q0: np.ndarray
    xi0: np.ndarray

    @classmethod
    def start(cls, q0, xi0) -> "VirtualPose":
        q0 = np.asarray(q0, dtype=float).reshape(3, 3)
        xi0 = np.asarray(xi0, dtype=float).reshape(3)
        if not is_rotation(q0):
            raise ValueError("q0 is not a rotation")
        return cls(q0.copy(), xi0.copy(), q0.copy(), xi0.copy())

    @property
    def pose(self) -> Pose:
        return Pose(self.q, self.xi)


def step_extension(v: VirtualPose, u: Twist, dt: float) -> VirtualPose:
    if dt <= 0:
        raise ValueError("dt must be positive")
    q, xi = se3_step(v.q, v.xi, u, dt)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(xi))):
        raise FloatingPointError("virtual pose left the finite range")
    return VirtualPose(q, xi, v.q0, v.xi0)
