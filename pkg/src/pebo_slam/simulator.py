"""Ground-truth world: rigid-body kinematics, static landmarks, sensors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .manifold import ORTHO_TOL, Pose, Twist, orthonormality_error, se3_step

TIME_EPS = 1e-9


class ProfileExhausted(RuntimeError):
    pass


class DegenerateBearing(ValueError):
    def __init__(self, index: int):
        super().__init__(f"robot coincides with landmark {index}")
        self.index = index


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    twist: Twist


@dataclass(frozen=True)
class TrajectoryProfile:
    """Piecewise-constant body twists covering ``[0, t_final]``."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("trajectory needs at least one segment")
        if abs(segs[0].t_start) > TIME_EPS:
            raise ValueError("first segment must start at t = 0")
        for s in segs:
            if s.t_end < s.t_start:
                raise ValueError(f"segment [{s.t_start}, {s.t_end}] has negative length")
        for a, b in zip(segs, segs[1:]):
            if abs(a.t_end - b.t_start) > TIME_EPS:
                raise ValueError(f"segments not contiguous at t = {a.t_end}")

    @property
    def t_final(self) -> float:
        return self.segments[-1].t_end

    def twist_at(self, t: float) -> Twist:
        if t < -TIME_EPS or t > self.t_final + TIME_EPS:
            raise ProfileExhausted(f"t = {t} outside [0, {self.t_final}]")
        for s in self.segments:
            if s.t_start - TIME_EPS <= t < s.t_end:
                return s.twist
        return self.segments[-1].twist


def stop_profile(vel, omega, t_stop: float, t_final: float) -> TrajectoryProfile:
    """Constant twist until ``t_stop``, then at rest."""
    segs = [Segment(0.0, t_stop, Twist(omega, vel))]
    if t_final > t_stop:
        segs.append(Segment(t_stop, t_final, Twist()))
    return TrajectoryProfile(tuple(segs))


@dataclass(frozen=True)
class LandmarkField:
    landmarks: np.ndarray
    n_loc: int = 3

    def __post_init__(self):
        z = np.array(self.landmarks, dtype=float)
        if z.ndim != 2 or z.shape[1] != 3:
            raise ValueError("landmarks must be an (n, 3) array")
        z.setflags(write=False)
        object.__setattr__(self, "landmarks", z)
        n = z.shape[0]
        if not n >= self.n_loc >= 3:
            raise ValueError(f"need n >= n_loc >= 3, got n={n}, n_loc={self.n_loc}")
        r = np.diff(z[: self.n_loc], axis=0)
        for i in range(len(r)):
            for j in range(i + 1, len(r)):
                if np.linalg.norm(np.cross(r[i], r[j])) <= 1e-6:
                    raise ValueError(
                        f"localization landmarks violate r_{i + 1} x r_{j + 1} != 0"
                    )

    @property
    def n(self) -> int:
        return self.landmarks.shape[0]


@dataclass(frozen=True)
class NoiseConfig:
    enabled: bool = False
    seed: int = 0
    twist_amplitude: float = 0.01
    bearing_amplitude: float = 0.01

    def __post_init__(self):
        if self.twist_amplitude < 0 or self.bearing_amplitude < 0:
            raise ValueError("noise amplitudes must be non-negative")


@dataclass(frozen=True)
class SimState:
    t: float
    pose: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        if orthonormality_error(self.pose.rot) > ORTHO_TOL:
            raise ValueError("pose rotation is not in SO(3)")


def step_true(state: SimState, profile: TrajectoryProfile, dt: float) -> SimState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if state.t + dt > profile.t_final + TIME_EPS:
        raise ProfileExhausted(f"step to t = {state.t + dt} beyond {profile.t_final}")
    u = profile.twist_at(state.t + 0.5 * dt)
    rot, pos = se3_step(state.pose.rot, state.pose.pos, u, dt)
    return SimState(state.t + dt, Pose(rot, pos))


def bearings(state: SimState, lm: LandmarkField):
    """Body-frame unit bearings, one row per landmark."""
    d = lm.landmarks - state.pose.pos
    dist = np.linalg.norm(d, axis=1)
    bad = np.flatnonzero(dist <= 1e-9)
    if bad.size:
        raise DegenerateBearing(int(bad[0]))
    return (d @ state.pose.rot) / dist[:, None]


def make_rng(cfg: NoiseConfig) -> np.random.Generator:
    return np.random.default_rng(cfg.seed)


def corrupt(y, u: Twist, cfg: NoiseConfig, rng: np.random.Generator):
    """Add uniform noise to bearings and twist; bearings are re-normalized.

    Draw order per call is fixed (6 twist values, then 3n bearing values),
    so a seed reproduces the stream exactly.
    """
    y = np.asarray(y, dtype=float)
    if not cfg.enabled:
        return y, u, rng
    a_u, a_y = cfg.twist_amplitude, cfg.bearing_amplitude
    nu = rng.uniform(-1.0, 1.0, 6) * a_u
    ny = rng.uniform(-1.0, 1.0, y.shape) * a_y
    yn = y + ny
    yn = yn / np.linalg.norm(yn, axis=-1, keepdims=True)
    un = Twist(u.omega + nu[:3], u.vel + nu[3:])
    return yn, un, rng


def circle_radius(vel: Sequence[float], omega: Sequence[float]) -> float:
    return float(np.linalg.norm(vel) / np.linalg.norm(omega))
