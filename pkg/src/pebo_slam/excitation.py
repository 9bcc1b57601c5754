"""Interval / persistent excitation certificates from a recorded run.

For landmark ``i`` the regressor energy over ``[a, b]`` is

    G_i(a, b) = int_a^b Pi_{Q y_i(s)} ds,

with ``Q y_i`` the virtual-frame bearing stored in the ``bv_i_*`` columns.
Interval excitation holds when ``lambda_min G_i(t0, tc) >= delta > 0`` for
one interval; persistent excitation needs this for every window of a fixed
length, uniformly in time. Integrals use the left rectangle rule on the
(possibly decimated) sample grid.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .manifold import projector

DEFAULT_TOL = 1e-6
DEFAULT_WINDOW = 2.0


@dataclass(frozen=True)
class LandmarkExcitation:
    index: int
    t0: float
    tc: float
    delta: float            # lambda_min of the energy over [t0, tc]
    ie: bool
    pe_window: float
    pe_min: float           # worst sliding-window lambda_min
    pe_worst_t: float       # start of that window
    pe: bool

    def line(self) -> str:
        return (f"landmark {self.index}: IE {'yes' if self.ie else 'no'} "
                f"(t0={self.t0:.3f}, tc={self.tc:.3f}, delta={self.delta:.4g}); "
                f"PE {'yes' if self.pe else 'no'} "
                f"(window {self.pe_window:g} s, min lambda={self.pe_min:.4g} "
                f"at t={self.pe_worst_t:.3f})")


def read_record(path):
    """Header list and float array of a run CSV (header-only gives 0 rows)."""
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def _bearings(header, data):
    n = 0
    while f"bv_{n + 1}_x" in header:
        n += 1
    if n == 0:
        raise ValueError("record has no bv_i_* columns")
    cols = [[header.index(f"bv_{i}_{c}") for c in "xyz"] for i in range(1, n + 1)]
    return np.stack([data[:, c] for c in cols], axis=1)  # (T, n, 3)


def cumulative_energy(t, bv):
    """``C[k] = int_{t_0}^{t_k} Pi ds`` for each landmark, shape (T, n, 3, 3)."""
    steps = np.diff(t)
    pis = projector(bv[:-1])
    c = np.zeros((len(t),) + bv.shape[1:] + (3,))
    c[1:] = np.cumsum(pis * steps[:, None, None, None], axis=0)
    return c


def _lam_min(g):
    return np.linalg.eigvalsh(g)[..., 0]


def excitation_report(header, data, tol: float = DEFAULT_TOL,
                      window: float = DEFAULT_WINDOW, t0=None, tc=None):
    """Per-landmark IE/PE certificates.

    Without an explicit interval, ``t0`` is the first sample and ``tc`` the
    earliest time after which the remaining record carries less than
    ``tol`` of energy in some direction, i.e. where excitation ends.
    """
    t = data[:, 0] if len(data) else np.zeros(0)
    bv = _bearings(header, data)
    n = bv.shape[1]
    if len(t) < 2:
        return [LandmarkExcitation(i + 1, 0.0, 0.0, 0.0, False, window, 0.0, 0.0, False)
                for i in range(n)]
    c = cumulative_energy(t, bv)
    tail = _lam_min(c[-1] - c)                      # energy of [t_k, end]
    # sliding windows [t_k, t_k + window] fully inside the record
    ends = np.searchsorted(t, t + window - 1e-9)
    ok = ends < len(t)
    starts = np.flatnonzero(ok)
    out = []
    for i in range(n):
        a = float(t[0]) if t0 is None else float(t0)
        if tc is None:
            dead = np.flatnonzero(tail[:, i] < tol)
            b = float(t[dead[0]]) if dead.size else float(t[-1])
        else:
            b = float(tc)
        ka, kb = np.searchsorted(t, [a - 1e-9, b - 1e-9])
        kb = min(kb, len(t) - 1)
        delta = float(_lam_min(c[kb, i] - c[ka, i])) if kb > ka else 0.0
        if starts.size:
            lam = _lam_min(c[ends[starts], i] - c[starts, i])
            worst = int(np.argmin(lam))
            pe_min, pe_t = float(lam[worst]), float(t[starts[worst]])
        else:
            pe_min, pe_t = 0.0, float(t[0])
        out.append(LandmarkExcitation(i + 1, a, b, delta, delta >= tol, window,
                                      pe_min, pe_t, bool(starts.size) and pe_min >= tol))
    return out


def report_file(path, **kw):
    header, data = read_record(path)
    return excitation_report(header, data, **kw)
