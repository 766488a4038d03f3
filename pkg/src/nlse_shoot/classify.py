"""Fate of a shot (the +inf / -inf / 0 trichotomy) and its crossing structure."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .integrate import EventKind, SolveConfig, Trajectory, integrate_shot

__all__ = [
    "Fate",
    "Classification",
    "InvalidN",
    "classify",
    "classify_trajectory",
    "in_ground_set",
    "in_excited_set",
    "crossing_count",
]


class Fate(str, enum.Enum):
    DIVERGES_PLUS = "DivergesPlus"
    DIVERGES_MINUS = "DivergesMinus"
    DECAYS = "DecaysToZero"
    UNDETERMINED = "Undetermined"


class InvalidN(ValueError):
    pass


@dataclass(frozen=True)
class Classification:
    """Outcome of one shot.

    ``extrema_radii`` lists every refined zero of u' and lets the excited-set
    predicate check the shape between crossings.
    """

    fate: Fate
    crossings: tuple[float, ...]
    monotone_to_first_crossing: bool
    extrema_count: int
    extrema_radii: tuple[float, ...] = ()
    grazing: bool = False

    @property
    def n_crossings(self) -> int:
        return len(self.crossings)


def _is_trivial(traj: Trajectory) -> bool:
    return bool(np.all(traj.u == 0.0) and np.all(traj.du == 0.0))


def _grazes(traj: Trajectory, tol: float) -> bool:
    for e in traj.events:
        if e.kind is EventKind.U_ZERO and abs(e.state.du) < tol:
            return True
        if e.kind is EventKind.U_PRIME_ZERO and abs(e.state.u) < tol:
            return True
    return False


def classify_trajectory(traj: Trajectory) -> Classification:
    """Classification read off the events without any re-integration."""
    if _is_trivial(traj):
        return Classification(Fate.DECAYS, (), False, 0)
    crossings = tuple(e.r for e in traj.events_of(EventKind.U_ZERO))
    extrema = tuple(e.r for e in traj.events_of(EventKind.U_PRIME_ZERO))
    if crossings:
        monotone = traj.du[0] <= 0 and not any(r < crossings[0] for r in extrema)
    else:
        monotone = False
    if traj.termination is EventKind.BLOWUP:
        fate = Fate.DIVERGES_PLUS if traj.events[-1].state.u > 0 else Fate.DIVERGES_MINUS
    elif traj.termination is EventKind.DECAY:
        fate = Fate.DECAYS
    else:
        fate = Fate.UNDETERMINED
    return Classification(fate, crossings, monotone, len(extrema), extrema)


def classify(traj: Trajectory, config: SolveConfig | None = None) -> Classification:
    """Classify a terminated shot.

    A zero of u with u' ~ 0 (or an extremum with u ~ 0) only happens for the
    trivial solution, so a shot that grazes within ``graze_tol`` is re-run at
    10x tighter tolerances; if the graze persists the fate is Undetermined.
    """
    config = config or traj.config
    out = classify_trajectory(traj)
    if out.fate is Fate.DECAYS and not out.crossings and _is_trivial(traj):
        return out
    problem = traj.problem
    if problem is None:
        return out
    tol = config.graze_tol * problem.b
    if not _grazes(traj, tol):
        return out
    retry = integrate_shot(problem, traj.param, config.tightened(10.0))
    again = classify_trajectory(retry)
    if _grazes(retry, tol):
        return Classification(
            Fate.UNDETERMINED, again.crossings, again.monotone_to_first_crossing,
            again.extrema_count, again.extrema_radii, grazing=True,
        )
    return again


def crossing_count(c: Classification) -> int:
    return len(c.crossings)


def in_ground_set(c: Classification) -> bool:
    """u reaches zero while still positive and strictly decreasing."""
    return len(c.crossings) >= 1 and c.monotone_to_first_crossing


def in_excited_set(c: Classification, n: int) -> bool:
    """Sign/monotonicity pattern of a shot just beyond the n-th excited state.

    Requires at least ``n + 1`` crossings, a monotone descent into the first
    one, and exactly one extremum in each gap between consecutive crossings
    up to crossing ``n + 1``.  For ``n = 1`` this is the set with
    ``r0 < rho1 < r1`` (one minimum below zero between the two crossings).
    """
    if n < 1:
        raise InvalidN(f"n must be >= 1, got {n}")
    cr = c.crossings
    if len(cr) < n + 1 or not c.monotone_to_first_crossing:
        return False
    ext = c.extrema_radii
    for a, b in zip(cr[: n], cr[1 : n + 1]):
        if sum(1 for r in ext if a < r < b) != 1:
            return False
    return True
