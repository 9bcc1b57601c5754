"""SO(3)/SE(3) primitives, projectors and 3x3 cofactor algebra.

Every function accepts leading batch dimensions where that makes sense
(``hat``, ``projector``, ``adjugate3``, ``det3``), so per-landmark pipelines
can be stepped as one array operation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SMALL_ANGLE = 1e-8
ORTHO_TOL = 1e-9


class DegenerateVector(ValueError):
    """Raised when a direction is requested from a (near) zero vector."""


def hat(a):
    """Skew matrix ``a_x`` with ``hat(a) @ b == cross(a, b)``."""
    a = np.asarray(a, dtype=float)
    out = np.zeros(a.shape[:-1] + (3, 3))
    out[..., 0, 1] = -a[..., 2]
    out[..., 0, 2] = a[..., 1]
    out[..., 1, 0] = a[..., 2]
    out[..., 1, 2] = -a[..., 0]
    out[..., 2, 0] = -a[..., 1]
    out[..., 2, 1] = a[..., 0]
    return out


def vee(m):
    m = np.asarray(m, dtype=float)
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


@dataclass(frozen=True)
class Twist:
    """Body-frame velocity pair (rad/s, m/s)."""

    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float).reshape(3)
        v = np.asarray(self.vel, dtype=float).reshape(3)
        if not (np.all(np.isfinite(om)) and np.all(np.isfinite(v))):
            raise ValueError("twist entries must be finite")
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "vel", v)

    def as_vector(self):
        return np.concatenate([self.omega, self.vel])


def wedge6(u: Twist):
    """4x4 Lie-algebra element ``[hat(omega), vel; 0, 0]``."""
    out = np.zeros((4, 4))
    out[:3, :3] = hat(u.omega)
    out[:3, 3] = u.vel
    return out


def vee6(m) -> Twist:
    m = np.asarray(m, dtype=float)
    return Twist(vee(m[:3, :3]), m[:3, 3].copy())


_I3 = np.eye(3)
_I3.setflags(write=False)


def _hat3(a0, a1, a2):
    return np.array([[0.0, -a2, a1], [a2, 0.0, -a0], [-a1, a0, 0.0]])


def _exp_and_jacobian(a):
    a0, a1, a2 = (float(v) for v in a)
    theta2 = a0 * a0 + a1 * a1 + a2 * a2
    k = _hat3(a0, a1, a2)
    kk = k @ k
    if theta2 < SMALL_ANGLE * SMALL_ANGLE:
        return _I3 + k + 0.5 * kk, _I3 + 0.5 * k + kk / 6.0
    theta = theta2**0.5
    s, c = np.sin(theta), np.cos(theta)
    b = (1.0 - c) / theta2
    return _I3 + (s / theta) * k + b * kk, _I3 + b * k + ((theta - s) / (theta2 * theta)) * kk


_cache_key = None
_cache_val = None


def exp_and_jacobian(a):
    """``(exp_so3(a), left_jacobian_so3(a))``; remembers the last argument."""
    global _cache_key, _cache_val
    a = np.asarray(a, dtype=float).reshape(3)
    key = a.tobytes()
    if key != _cache_key:
        _cache_val = _exp_and_jacobian(a)
        _cache_key = key
    return _cache_val


def exp_so3(a):
    """Rodrigues formula; second-order series below ``SMALL_ANGLE``."""
    return exp_and_jacobian(a)[0].copy()


def left_jacobian_so3(a):
    return exp_and_jacobian(a)[1].copy()


def rotz(angle: float):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def orthonormality_error(r) -> float:
    r = np.asarray(r, dtype=float)
    d = r.T @ r - _I3
    return float(np.sqrt(np.einsum("ij,ij->", d, d)))


def nearest_rotation(r):
    """Polar projection onto SO(3)."""
    u, _, vt = np.linalg.svd(np.asarray(r, dtype=float))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def reorthonormalize(r, tol: float = ORTHO_TOL):
    """Project back onto SO(3) only when drift exceeds ``tol``."""
    if orthonormality_error(r) > tol:
        return nearest_rotation(r)
    return r


def is_rotation(r, tol: float = ORTHO_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    return (
        r.shape == (3, 3)
        and orthonormality_error(r) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


@dataclass(frozen=True)
class Pose:
    """Element ``T(rot, pos)`` of SE(3)."""

    rot: np.ndarray = field(default_factory=lambda: np.eye(3))
    pos: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rot", np.asarray(self.rot, dtype=float).reshape(3, 3))
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=float).reshape(3))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, m) -> "Pose":
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3].copy(), m[:3, 3].copy())

    def as_matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.rot
        m[:3, 3] = self.pos
        return m


def pose_compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.rot @ b.rot, a.rot @ b.pos + a.pos)


def pose_inverse(a: Pose) -> Pose:
    return Pose(a.rot.T, -a.rot.T @ a.pos)


def se3_step(rot, pos, u: Twist, dt: float):
    """Advance ``X' = X U^`` over ``dt`` with ``U`` held constant.

    Uses the closed-form SE(3) exponential, so constant-twist motion is
    integrated without discretization error.
    """
    e, j = exp_and_jacobian(u.omega * dt)
    new_pos = pos + rot @ (j @ u.vel) * dt
    new_rot = reorthonormalize(rot @ e)
    return new_rot, new_pos


def projector(x):
    """``I - x x^T / |x|^2``; batched over leading dimensions."""
    x = np.asarray(x, dtype=float)
    n2 = np.einsum("...i,...i->...", x, x)
    if n2.min() <= 1e-24:
        raise DegenerateVector("projector of a vector with norm below 1e-12")
    outer = x[..., :, None] * x[..., None, :]
    return _I3 - outer / n2[..., None, None]


# adj(A)[i, j] = A[p, q] A[r, s] - A[p, s] A[r, q], the (j, i) cofactor
_ROWS = ((1, 2), (0, 2), (0, 1))
_P = np.array([[_ROWS[j][0] for j in range(3)] for i in range(3)])
_R = np.array([[_ROWS[j][1] for j in range(3)] for i in range(3)])
_Q = np.array([[_ROWS[i][0] for j in range(3)] for i in range(3)])
_S = np.array([[_ROWS[i][1] for j in range(3)] for i in range(3)])
_SIGN = np.array([[(-1.0) ** (i + j) for j in range(3)] for i in range(3)])


def adjugate3(a):
    """Transpose of the cofactor matrix; defined for singular input."""
    a = np.asarray(a, dtype=float)
    minors = a[..., _P, _Q] * a[..., _R, _S] - a[..., _P, _S] * a[..., _R, _Q]
    return _SIGN * minors


def det3(a):
    a = np.asarray(a, dtype=float)
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )
