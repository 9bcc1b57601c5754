"""Lockstep experiment runner and CSV/summary output."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import oracles
from .baseline_kf import BodyLandmarkState, kf_step
from .drem import KelreState, LreSample, ScalarRegressor, drem_mix, kelre_step, make_lre
from .extension import VirtualPose, step_extension
from .landmark_observer import (
    IntegralRegressor,
    LandmarkEstimatorState,
    effective_gain,
    landmark_step,
)
from .manifold import Pose, Twist, exp_so3
from .pose_observer import (
    BarFilterBank,
    PoseEstimate,
    bar_filter_step,
    inertial_landmarks,
    pose_step,
)
from .scenario import Scenario
from .simulator import SimState, bearings, corrupt, make_rng, step_true

log = logging.getLogger(__name__)


class NumericFailure(RuntimeError):
    pass


@dataclass
class StepSnapshot:
    """Everything known at one instant; handed to the optional probe."""

    k: int
    t: float
    truth: Pose
    landmarks: np.ndarray
    y_true: np.ndarray
    y: np.ndarray
    u: Twist
    ext: VirtualPose
    lre: LreSample
    kelre: KelreState
    regressor: ScalarRegressor
    lm: LandmarkEstimatorState
    bank: BarFilterBank
    pose: PoseEstimate
    kf: BodyLandmarkState


@dataclass
class RunResult:
    header: list
    rows: list
    summary: dict
    final: Optional[StepSnapshot] = None

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def csv_header(n: int) -> list:
    cols = ["t", "x", "y", "z"] + [f"R{i}{j}" for i in range(3) for j in range(3)]
    cols += ["x_hat", "y_hat", "z_hat"] + [f"R_hat{i}{j}" for i in range(3) for j in range(3)]
    cols += ["att_err", "pos_err"]
    for i in range(1, n + 1):
        cols += [f"zv_err_{i}", f"z_err_{i}", f"zb_err_{i}", f"delta_{i}",
                 f"delta_e_{i}", f"omega_{i}", f"bv_{i}_x", f"bv_{i}_y", f"bv_{i}_z"]
    return cols


def _errors(s: StepSnapshot):
    zv_true = oracles.oracle_zv(s.truth, s.ext, s.landmarks)
    zv_err = np.linalg.norm(s.lm.zv_hat - zv_true, axis=1)
    z_hat = inertial_landmarks(s.pose, s.lm.zv_hat, s.ext)
    z_err = np.linalg.norm(z_hat - s.landmarks, axis=1)
    zb_true = oracles.body_landmarks(s.truth, s.landmarks)
    zb_err = np.linalg.norm(s.kf.zb_hat - zb_true, axis=1)
    r_hat = s.pose.attitude(s.ext)
    att_err = float(np.linalg.norm(r_hat - s.truth.rot))
    pos_err = float(np.linalg.norm(s.pose.x_hat - s.truth.pos))
    return zv_err, z_err, zb_err, att_err, pos_err, r_hat


def _row(s: StepSnapshot):
    zv_err, z_err, zb_err, att_err, pos_err, r_hat = _errors(s)
    de = effective_gain(s.lm, s.regressor)
    bv = s.y @ s.ext.q.T
    row = [s.t, *s.truth.pos, *s.truth.rot.ravel(), *s.pose.x_hat, *r_hat.ravel(),
           att_err, pos_err]
    for i in range(len(zv_err)):
        row += [zv_err[i], z_err[i], zb_err[i], s.regressor.delta[i], de[i],
                s.lm.omega[i], *bv[i]]
    return row


def _error_summary(s: StepSnapshot) -> dict:
    zv_err, z_err, zb_err, att_err, pos_err, _ = _errors(s)
    return {
        "t": s.t,
        "zv_err": zv_err.tolist(),
        "z_err": z_err.tolist(),
        "zb_err": zb_err.tolist(),
        "att_err": att_err,
        "pos_err": pos_err,
    }


STATE_FIELDS = {
    "chi": lambda s: s.lm.chi,
    "omega": lambda s: s.lm.omega,
    "zv_hat": lambda s: s.lm.zv_hat,
    "qe": lambda s: s.kelre.qe,
    "phi": lambda s: s.kelre.phi,
    "bigY": lambda s: s.regressor.bigY,
    "zbar": lambda s: s.bank.zbar,
    "ybar": lambda s: s.bank.ybar,
    "phibar": lambda s: s.bank.phibar,
    "qc_hat": lambda s: s.pose.qc_hat,
    "x_hat": lambda s: s.pose.x_hat,
    "xi": lambda s: s.ext.xi,
    "zb_hat": lambda s: s.kf.zb_hat,
    "kf_cov": lambda s: s.kf.cov,
}


# NaN/Inf is absorbing for every state here, so sampling loses no detection
NORM_EVERY = 10


def _track_norms(snap: StepSnapshot, max_norm: dict):
    for name, get in STATE_FIELDS.items():
        m = float(np.max(np.abs(get(snap))))
        if not np.isfinite(m):
            raise NumericFailure(f"non-finite value in {name} at t = {snap.t:.6g}")
        if m > max_norm[name]:
            max_norm[name] = m


def initial_states(sc: Scenario):
    lm_field = sc.landmark_field()
    n, n_loc = lm_field.n, lm_field.n_loc
    r0 = sc.initial_rotation()
    x0 = np.asarray(sc.trajectory.initial_position, dtype=float)
    sim = SimState(0.0, Pose(r0, x0))
    ext = VirtualPose.start(exp_so3(sc.extension.q0_rotvec), sc.extension.xi0)
    kelre = KelreState.zeros(n, sc.drem.alpha)
    lo = sc.landmark_observer
    lm = LandmarkEstimatorState.start(n, lo.gamma, lo.k_i, lo.chi0, lo.zv_hat0)
    po = sc.pose_observer
    # the pre-selected X_* defaults to the true initial pose, which pins {I}
    r_star = r0 if po.r_star_rotvec is None else exp_so3(po.r_star_rotvec)
    x_star = x0 if po.x_star is None else np.asarray(po.x_star, dtype=float)
    bank = BarFilterBank.start(n_loc, r_star, x_star, po.t_star, po.rho)
    pose = PoseEstimate.start(n_loc, exp_so3(po.qc_hat0_rotvec), po.x_hat0, po.k, po.sigma)
    bl = sc.baseline
    kf = BodyLandmarkState.start(n, bl.zb_hat0, bl.p0, bl.q_proc, bl.r_meas)
    return sim, ext, kelre, lm, bank, pose, kf


def run(sc: Scenario, probe: Optional[Callable[[StepSnapshot], None]] = None,
        record: bool = True) -> RunResult:
    """Step every block once per ``dt`` and collect the decimated record.

    Within a step all blocks read the same time-``t`` quantities (true pose,
    measurements, extension, filter states) and then advance together, in the
    order simulator, noise, extension, DREM, landmark observer, pose
    observer, baseline.
    """
    sc.validate()
    profile = sc.profile()
    lm_field = sc.landmark_field()
    z = lm_field.landmarks
    noise = sc.noise_config()
    rng = make_rng(noise)
    dt, n_steps, dec = float(sc.dt), sc.n_steps, int(sc.output.decimate)
    sim, ext, kelre, lm, bank, pose, kf = initial_states(sc)
    integ = IntegralRegressor.zeros(lm_field.n) if sc.landmark_observer.integral_diagnostic else None

    header = csv_header(lm_field.n)
    rows = []
    max_norm = {name: 0.0 for name in STATE_FIELDS}
    summary = {"scenario": sc.name, "seed": noise.seed, "noise": noise.enabled,
               "dt": dt, "t_final": n_steps * dt, "n_steps": n_steps}
    at_t_star = None
    snap = None

    for k in range(n_steps + 1):
        t = k * dt
        y_true = bearings(sim, lm_field)
        u_true = profile.twist_at(t + 0.5 * dt) if k < n_steps else profile.twist_at(t)
        y, u, rng = corrupt(y_true, u_true, noise, rng)
        sample = make_lre(ext, y)
        reg = drem_mix(kelre)
        snap = StepSnapshot(k, t, sim.pose, z, y_true, y, u, ext, sample, kelre, reg,
                            lm, bank, pose, kf)

        if k % NORM_EVERY == 0 or k == n_steps:
            _track_norms(snap, max_norm)
        if probe is not None:
            probe(snap)
        if record and n_steps > 0 and (k % dec == 0 or k == n_steps):
            rows.append(_row(snap))
        if at_t_star is None and t >= bank.t_star - 0.5 * dt:
            at_t_star = _error_summary(snap)
        if k == n_steps:
            break

        kelre = kelre_step(kelre, sample, dt)
        new_lm = landmark_step(lm, reg, dt)
        if integ is not None:
            integ = integ.step(reg, dt)
        new_bank = bar_filter_step(bank, ext, y, t, dt)
        pose = pose_step(pose, bank, lm.zv_hat, ext, u, dt)
        bank, lm = new_bank, new_lm
        kf = kf_step(kf, u, y, dt)
        ext = step_extension(ext, u, dt)
        sim = step_true(sim, profile, dt)

    summary["initial" if n_steps == 0 else "terminal"] = _error_summary(snap)
    if at_t_star is not None:
        summary["at_t_star"] = at_t_star
    summary["max_state_abs"] = max_norm
    summary["bar_filter_det"] = np.linalg.det(bank.phibar).tolist()
    summary["kf_covariance_resets"] = kf.resets
    if integ is not None:
        zv_true = oracles.oracle_zv(snap.truth, snap.ext, z)
        summary["integral_diagnostic_err"] = np.linalg.norm(integ.estimate() - zv_true, axis=1).tolist()
    return RunResult(header, rows, summary, snap)


def write_outputs(result: RunResult, out_dir, stem: str) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    sum_path = out / f"{stem}.summary.json"
    csv_path.write_text(result.csv_text())
    sum_path.write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    return csv_path, sum_path


def with_overrides(sc: Scenario, seed=None, noise=None, decimate=None, out=None) -> Scenario:
    sc = replace(sc, noise=replace(sc.noise), output=replace(sc.output))
    if seed is not None:
        sc.noise.seed = int(seed)
    if noise is not None:
        sc.noise.enabled = bool(noise)
    if decimate is not None:
        sc.output.decimate = int(decimate)
    if out is not None:
        sc.output.dir = str(out)
    return sc
