"""Scenario files: a YAML document describing one experiment.

Schema (``schema_version: 1``); every section and key is optional and
falls back to the defaults below::

    schema_version: 1
    name: paper-sec4
    dt: 0.001
    t_final: 30.0
    trajectory:
      initial_position: [1, 1, 2]
      initial_rotvec: [0, 0, 0.5235987755982988]   # axis * angle
      segments:
        - {t_start: 0, t_end: 12, omega: [0, 0, -0.4], vel: [1, 0, 0]}
        - {t_start: 12, t_end: 30, omega: [0, 0, 0], vel: [0, 0, 0]}
    landmarks:
      positions: [[2.4, 0.8, 2.2], ...]
      n_loc: 3
    noise: {enabled: false, seed: 0, twist_amplitude: 0.01, bearing_amplitude: 0.01}
    extension: {q0_rotvec: [0, 0, 1.5707963267948966], xi0: [0, 1, 1]}
    drem: {alpha: 5.0}                  # scalar or one value per landmark
    landmark_observer: {gamma: 100.0, k_i: 20.0, chi0: null, zv_hat0: null,
                        integral_diagnostic: false}
    pose_observer: {rho: 1.0, k: 1.0, sigma: 1.0, t_star: 12.0,
                    qc_hat0_rotvec: [0, 0, 0], x_hat0: [0, 0, 0],
                    x_star: null, r_star_rotvec: null}   # null: true X(0)
    baseline: {q_proc: 1.0e-4, r_meas: 1.0e-2, p0: 10.0, zb_hat0: null}
    output: {dir: out, decimate: 10}
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .manifold import Twist, exp_so3
from .simulator import LandmarkField, NoiseConfig, Segment, TrajectoryProfile

SCHEMA_VERSION = 1
MAX_DT = 0.01


class ScenarioError(ValueError):
    pass


def _vec(x, n=3):
    a = np.asarray(x, dtype=float)
    if a.shape != (n,):
        raise ValueError(f"expected {n} numbers, got {x!r}")
    return a


@dataclass
class TrajectoryConfig:
    initial_position: list = field(default_factory=lambda: [1.0, 1.0, 2.0])
    initial_rotvec: list = field(default_factory=lambda: [0.0, 0.0, math.pi / 6])
    segments: list = field(default_factory=lambda: [
        {"t_start": 0.0, "t_end": 12.0, "omega": [0.0, 0.0, -0.4], "vel": [1.0, 0.0, 0.0]},
        {"t_start": 12.0, "t_end": 30.0, "omega": [0.0, 0.0, 0.0], "vel": [0.0, 0.0, 0.0]},
    ])

    def profile(self) -> TrajectoryProfile:
        segs = []
        for i, s in enumerate(self.segments):
            try:
                segs.append(Segment(float(s["t_start"]), float(s["t_end"]),
                                    Twist(_vec(s.get("omega", [0, 0, 0])),
                                          _vec(s.get("vel", [0, 0, 0])))))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"segments[{i}]: {exc}") from exc
        return TrajectoryProfile(tuple(segs))


# Six landmarks about 0.5 m off the visited arc, so every bearing sweeps
# fast enough to excite the DREM determinant under the default gains.
DEFAULT_LANDMARKS = [
    [2.4, 0.8, 2.2],
    [4.7, 0.5, 1.8],
    [4.1, -1.7, 2.0],
    [3.6, -3.8, 2.2],
    [1.8, -3.1, 1.8],
    [0.1, -3.2, 2.0],
]

FAR_LANDMARKS = [
    [5.0, 0.0, 1.0],
    [4.0, 3.0, 2.0],
    [0.0, 5.0, 1.5],
    [-3.0, 4.0, 3.0],
    [-5.0, -1.0, 2.0],
    [2.0, -4.0, 1.0],
]


@dataclass
class LandmarkConfig:
    positions: list = field(default_factory=lambda: [list(p) for p in DEFAULT_LANDMARKS])
    n_loc: int = 3


@dataclass
class NoiseSection:
    enabled: bool = False
    seed: int = 0
    twist_amplitude: float = 0.01
    bearing_amplitude: float = 0.01


@dataclass
class ExtensionConfig:
    q0_rotvec: list = field(default_factory=lambda: [0.0, 0.0, math.pi / 2])
    xi0: list = field(default_factory=lambda: [0.0, 1.0, 1.0])


@dataclass
class DremConfig:
    alpha: Any = 5.0


@dataclass
class LandmarkObserverConfig:
    gamma: Any = 100.0
    k_i: Any = 20.0
    chi0: Any = None
    zv_hat0: Any = None
    integral_diagnostic: bool = False


@dataclass
class PoseObserverConfig:
    rho: Any = 1.0
    k: Any = 1.0
    sigma: Any = 1.0
    t_star: float = 12.0
    qc_hat0_rotvec: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    x_hat0: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    x_star: Any = None
    r_star_rotvec: Any = None


@dataclass
class BaselineConfig:
    q_proc: float = 1e-4
    r_meas: float = 1e-2
    p0: float = 10.0
    zb_hat0: Any = None


@dataclass
class OutputConfig:
    dir: str = "out"
    decimate: int = 10


SECTIONS = {
    "trajectory": TrajectoryConfig,
    "landmarks": LandmarkConfig,
    "noise": NoiseSection,
    "extension": ExtensionConfig,
    "drem": DremConfig,
    "landmark_observer": LandmarkObserverConfig,
    "pose_observer": PoseObserverConfig,
    "baseline": BaselineConfig,
    "output": OutputConfig,
}


@dataclass
class Scenario:
    name: str = "paper-sec4"
    dt: float = 1e-3
    t_final: float = 30.0
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    landmarks: LandmarkConfig = field(default_factory=LandmarkConfig)
    noise: NoiseSection = field(default_factory=NoiseSection)
    extension: ExtensionConfig = field(default_factory=ExtensionConfig)
    drem: DremConfig = field(default_factory=DremConfig)
    landmark_observer: LandmarkObserverConfig = field(default_factory=LandmarkObserverConfig)
    pose_observer: PoseObserverConfig = field(default_factory=PoseObserverConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    schema_version: int = SCHEMA_VERSION

    # derived objects ---------------------------------------------------
    def profile(self) -> TrajectoryProfile:
        return self.trajectory.profile()

    def landmark_field(self) -> LandmarkField:
        return LandmarkField(np.asarray(self.landmarks.positions, dtype=float),
                             int(self.landmarks.n_loc))

    def noise_config(self) -> NoiseConfig:
        n = self.noise
        return NoiseConfig(bool(n.enabled), int(n.seed), float(n.twist_amplitude),
                           float(n.bearing_amplitude))

    def initial_rotation(self):
        return exp_so3(_vec(self.trajectory.initial_rotvec))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    def validate(self) -> "Scenario":
        """Raise ``ScenarioError`` naming the offending field."""
        checks = [
            ("schema_version", lambda: self.schema_version == SCHEMA_VERSION,
             f"unsupported schema_version {self.schema_version}"),
            ("dt", lambda: 0 < float(self.dt) <= MAX_DT, f"dt must be in (0, {MAX_DT}]"),
            ("t_final", lambda: float(self.t_final) >= 0, "t_final must be >= 0"),
            ("t_final", lambda: abs(self.n_steps * self.dt - self.t_final) < 1e-9 * max(1.0, self.t_final),
             "t_final must be a multiple of dt"),
            ("output.decimate", lambda: int(self.output.decimate) >= 1, "decimate must be >= 1"),
            ("pose_observer.t_star", lambda: float(self.pose_observer.t_star) > 0, "t_star must be > 0"),
            ("noise", self.noise_config, None),
            ("trajectory.segments", self.profile, None),
            ("trajectory.initial_rotvec", self.initial_rotation, None),
            ("trajectory.initial_position", lambda: _vec(self.trajectory.initial_position), None),
            ("landmarks", self.landmark_field, None),
            ("extension.q0_rotvec", lambda: _vec(self.extension.q0_rotvec), None),
            ("extension.xi0", lambda: _vec(self.extension.xi0), None),
            ("pose_observer.qc_hat0_rotvec", lambda: _vec(self.pose_observer.qc_hat0_rotvec), None),
            ("pose_observer.x_hat0", lambda: _vec(self.pose_observer.x_hat0), None),
        ]
        n = len(self.landmarks.positions)
        nl = int(self.landmarks.n_loc)
        for path, size, val in [
            ("drem.alpha", n, self.drem.alpha),
            ("landmark_observer.gamma", n, self.landmark_observer.gamma),
            ("landmark_observer.k_i", n, self.landmark_observer.k_i),
            ("pose_observer.rho", nl, self.pose_observer.rho),
            ("pose_observer.k", nl - 1, self.pose_observer.k),
            ("pose_observer.sigma", nl, self.pose_observer.sigma),
            ("baseline.q_proc", 1, self.baseline.q_proc),
            ("baseline.r_meas", 1, self.baseline.r_meas),
            ("baseline.p0", 1, self.baseline.p0),
        ]:
            checks.append((path, lambda v=val, s=size: _positive_gain(v, s), None))
        for path, ok, msg in checks:
            try:
                res = ok()
            except (ValueError, TypeError, KeyError) as exc:
                raise ScenarioError(f"{path}: {exc}") from exc
            if msg is not None and not res:
                raise ScenarioError(f"{path}: {msg}")
        prof = self.profile()
        if prof.t_final + 1e-9 < self.t_final:
            raise ScenarioError(
                f"trajectory.segments: profile ends at {prof.t_final} < t_final {self.t_final}")
        return self


def _positive_gain(v, size):
    a = np.broadcast_to(np.asarray(v, dtype=float), (max(size, 1),))
    if np.any(~np.isfinite(a)) or np.any(a <= 0):
        raise ValueError(f"gains must be finite and > 0, got {v!r}")
    return True


def _line_map(node, prefix="", out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _line_map(v, path, out)
    return out


def _with_line(msg: str, lines: dict) -> str:
    path = msg.split(":", 1)[0]
    while path and path not in lines:
        path = path.rsplit(".", 1)[0] if "." in path else ""
    return f"line {lines[path]}: {msg}" if path else msg


def from_dict(raw: dict, lines: dict | None = None) -> Scenario:
    lines = lines or {}
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a mapping")
    top = {f.name for f in dataclasses.fields(Scenario)}
    kwargs = {}
    for key, value in raw.items():
        if key not in top:
            raise ScenarioError(_with_line(f"{key}: unknown field", lines))
        if key in SECTIONS:
            cls = SECTIONS[key]
            value = value or {}
            if not isinstance(value, dict):
                raise ScenarioError(_with_line(f"{key}: expected a mapping", lines))
            names = {f.name for f in dataclasses.fields(cls)}
            for sub in value:
                if sub not in names:
                    raise ScenarioError(_with_line(f"{key}.{sub}: unknown field", lines))
            kwargs[key] = cls(**value)
        else:
            kwargs[key] = value
    sc = Scenario(**kwargs)
    try:
        sc.dt = float(sc.dt)
        sc.t_final = float(sc.t_final)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(_with_line(f"dt: {exc}", lines)) from exc
    try:
        return sc.validate()
    except ScenarioError as exc:
        raise ScenarioError(_with_line(str(exc), lines)) from None


def loads(text: str) -> Scenario:
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"malformed scenario file: {exc}") from exc
    return from_dict(raw or {}, _line_map(node) if node is not None else {})


def load(path) -> Scenario:
    return loads(Path(path).read_text())


def builtin(name: str) -> Scenario:
    try:
        make = BUILTINS[name][1]
    except KeyError:
        raise ScenarioError(f"unknown builtin scenario {name!r}") from None
    return make().validate()


def _arc() -> Scenario:
    return Scenario()


def _arc_far() -> Scenario:
    sc = Scenario(name="paper-sec4-far")
    sc.landmarks.positions = [list(p) for p in FAR_LANDMARKS]
    return sc


def _static() -> Scenario:
    sc = Scenario(name="static", t_final=10.0)
    sc.trajectory.segments = [{"t_start": 0.0, "t_end": 10.0,
                               "omega": [0.0, 0.0, 0.0], "vel": [0.0, 0.0, 0.0]}]
    return sc


BUILTINS = {
    "paper-sec4": ("circular arc for 12 s then rest; 6 landmarks near the path",
                   _arc),
    "paper-sec4-far": ("same motion, landmarks 1-5 m away (weak excitation)",
                       _arc_far),
    "static": ("robot at rest for 10 s; no excitation at all", _static),
}
