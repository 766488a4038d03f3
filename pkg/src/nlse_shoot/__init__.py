"""Ground and excited states of radial semilinear Schrödinger equations by shooting."""
from __future__ import annotations

from .classify import Classification, Fate, classify, in_excited_set, in_ground_set
from .integrate import EventKind, SolveConfig, Trajectory, integrate_shot
from .problem import Family, ProblemSpec, ShootParam, State, rescale, series_start
from .shoot import (
    ExcitedResult,
    GroundStateResult,
    SweepRecord,
    find_excited,
    find_ground,
    mass,
    recover_omega,
    sweep_omega_of_b,
)

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "EventKind",
    "ExcitedResult",
    "Family",
    "Fate",
    "GroundStateResult",
    "ProblemSpec",
    "ShootParam",
    "SolveConfig",
    "State",
    "SweepRecord",
    "Trajectory",
    "classify",
    "find_excited",
    "find_ground",
    "in_excited_set",
    "in_ground_set",
    "integrate_shot",
    "mass",
    "recover_omega",
    "rescale",
    "series_start",
    "sweep_omega_of_b",
]
