"""Cumulative integrals along a trajectory's accepted-step grid.

Each step [r_i, r_i+1] is split into panels (one, except near the origin)
with nodes at the quarter points of each panel.  With a known ODE the node
states come from one fresh sub-step out of r_i, so they carry only local
(not interpolation) error; hand-built trajectories
fall back to cubic Hermite interpolation of the stored values and slopes.
Simpson on each panel and on its two halves are combined by Richardson
extrapolation, and their difference is kept as the error estimate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _dopri
from .integrate import Trajectory

PANEL_RATIO = 0.02


@dataclass(frozen=True)
class Cumulative:
    r: np.ndarray
    value: np.ndarray
    error: np.ndarray


def _panels(r0: float, h: float) -> int:
    # near the origin steps can be wider than r itself; r**(d-1) weights then need panels
    return max(1, int(np.ceil(h / (PANEL_RATIO * r0)))) if r0 > 0 else 1


def step_nodes(traj: Trajectory) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per step, radii and states at the quarter points of each panel.

    Both ends are included (taken from the stored samples), so a step split
    into m panels yields ``4m + 1`` nodes.
    """
    r, y, dy = traj.r, traj.y, traj.dy
    f = traj.rhs_function()
    out = []
    for i in range(len(r) - 1):
        r0, h = float(r[i]), float(r[i + 1] - r[i])
        m = _panels(r0, h)
        t = np.arange(1, 4 * m) / (4 * m)
        if f is not None:
            yi, fi = list(y[i]), list(dy[i])
            inner = np.array([_dopri.step(f, r0, yi, tj * h, fi)[0] for tj in t])
        else:
            tt = t[:, None]
            inner = ((2 * tt**3 - 3 * tt**2 + 1) * y[i] + (tt**3 - 2 * tt**2 + tt) * h * dy[i]
                     + (-2 * tt**3 + 3 * tt**2) * y[i + 1] + (tt**3 - tt**2) * h * dy[i + 1])
        rr = np.concatenate([[r0], r0 + t * h, [float(r[i + 1])]])
        out.append((rr, np.vstack([y[i], inner, y[i + 1]])))
    return out


def cumulative_integral(
    traj: Trajectory,
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    nodes: list | None = None,
    origin: float = 0.0,
) -> Cumulative:
    """Running integral of ``integrand(r, Y)`` from ``r[0]`` (plus ``origin``).

    ``integrand`` receives radii and state rows broadcast together, with
    ``Y[..., k]`` the k-th state component.
    """
    if nodes is None:
        nodes = step_nodes(traj)
    vals = np.empty(len(nodes))
    errs = np.empty(len(nodes))
    for i, (rr, yy) in enumerate(nodes):
        fv = integrand(rr, yy)
        hp = (rr[-1] - rr[0]) / ((len(rr) - 1) // 4)
        f0, f1, f2, f3, f4 = fv[0:-1:4], fv[1::4], fv[2::4], fv[3::4], fv[4::4]
        s1 = hp / 6 * (f0 + 4 * f2 + f4)
        s2 = hp / 12 * (f0 + 4 * f1 + 2 * f2 + 4 * f3 + f4)
        vals[i] = np.sum(s2 + (s2 - s1) / 15)
        errs[i] = np.sum(np.abs(s2 - s1)) / 15
    value = origin + np.concatenate([[0.0], np.cumsum(vals)])
    error = np.concatenate([[0.0], np.cumsum(errs)])
    return Cumulative(traj.r.copy(), value, error)
