"""Adaptive shots from the series start outward, with event detection."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _dopri
from .problem import (
    Family,
    ProblemSpec,
    RescaledProblem,
    ShootParam,
    State,
    limiting_rhs,
    make_rhs,
    series_start,
)

__all__ = [
    "SolveConfig",
    "EventKind",
    "Event",
    "Trajectory",
    "ShotSystem",
    "RescaledSystem",
    "LimitSystem",
    "NoSignChange",
    "integrate_shot",
    "integrate_system",
    "refine_event",
    "turning_radius",
    "start_radius",
    "sample_limiting",
]


@dataclass(frozen=True)
class SolveConfig:
    """Tolerances, thresholds and budgets for shots and searches.

    ``blowup_factor``, ``decay_u_tol``, ``decay_du_tol`` and ``graze_tol`` are
    multiples of the central value ``b``.  ``tube_rel`` sets where a converged
    profile is cut: the first radius at which the two bracketing shots
    disagree by more than this fraction of ``|u|``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    r_max: float = 60.0
    blowup_factor: float = 10.0
    decay_u_tol: float = 1e-8
    decay_du_tol: float = 1e-8
    max_steps: int = 200_000
    start_delta: float = 1e-4
    graze_tol: float = 1e-10
    tube_rel: float = 1e-3
    max_doublings: int = 30
    max_bisections: int = 200

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"SolveConfig.{f.name} must be a positive finite number, got {v!r}")
        if not self.r_max > self.start_delta:
            raise ValueError("r_max must exceed start_delta")

    def tightened(self, factor: float = 10.0) -> "SolveConfig":
        from dataclasses import replace

        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)


class EventKind(str, enum.Enum):
    U_ZERO = "UZero"
    U_PRIME_ZERO = "UPrimeZero"
    INFLECTION = "Inflection"
    BLOWUP = "Blowup"
    DECAY = "DecayDetected"
    BUDGET = "BudgetExhausted"


TERMINAL = (EventKind.BLOWUP, EventKind.DECAY, EventKind.BUDGET)


@dataclass(frozen=True)
class Event:
    kind: EventKind
    r: float
    state: State
    note: str = ""


# Picklable descriptions of the ODE a trajectory came from, so events can be
# refined by re-integration after the fact.
@dataclass(frozen=True)
class ShotSystem:
    problem: ProblemSpec
    param: ShootParam

    def make(self):
        return make_rhs(self.problem, self.param)


@dataclass(frozen=True)
class RescaledSystem:
    rescaled: RescaledProblem
    keep_small_terms: bool = True

    def make(self):
        return self.rescaled.make_rhs(self.keep_small_terms)


@dataclass(frozen=True)
class LimitSystem:
    d: int

    def make(self):
        return limiting_rhs(self.d)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted-step samples of one shot.

    ``y`` holds one state vector per row (u, u' [, h, h']) and ``dy`` the
    matching derivatives, so ``dy[:, 1]`` is u''.  ``system`` is ``None`` for
    hand-built trajectories; refinement then falls back to Hermite
    interpolation.
    """

    r: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    events: tuple[Event, ...] = ()
    termination: EventKind = EventKind.BUDGET
    system: ShotSystem | RescaledSystem | LimitSystem | None = None
    config: SolveConfig = field(default_factory=SolveConfig)
    meta: dict = field(default_factory=dict)

    @property
    def problem(self) -> ProblemSpec | None:
        return self.system.problem if isinstance(self.system, ShotSystem) else None

    @property
    def param(self) -> ShootParam | None:
        return self.system.param if isinstance(self.system, ShotSystem) else None

    @property
    def u(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def du(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def ddu(self) -> np.ndarray:
        return self.dy[:, 1]

    @property
    def h(self) -> np.ndarray | None:
        return self.y[:, 2] if self.y.shape[1] == 4 else None

    @property
    def dh(self) -> np.ndarray | None:
        return self.y[:, 3] if self.y.shape[1] == 4 else None

    @property
    def samples(self) -> list[State]:
        return [State.from_vector(r, y) for r, y in zip(self.r, self.y)]

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    def events_of(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind is kind]

    def rhs_function(self):
        return None if self.system is None else self.system.make()

    def truncated(self, radius: float, termination: EventKind | None = None, **meta) -> "Trajectory":
        """Copy keeping samples and events with ``r <= radius``."""
        n = int(np.searchsorted(self.r, radius, side="right"))
        if n < 2:
            raise ValueError("truncation radius leaves fewer than two samples")
        return Trajectory(
            self.r[:n].copy(),
            self.y[:n].copy(),
            self.dy[:n].copy(),
            tuple(e for e in self.events if e.r <= radius and e.kind not in TERMINAL),
            self.termination if termination is None else termination,
            self.system,
            self.config,
            {**self.meta, **meta},
        )

    @classmethod
    def from_samples(cls, r: Sequence[float], u: Sequence[float], du: Sequence[float], ddu=None, h=None, dh=None, **kw):
        """Hand-built trajectory, mostly for tests and post-processing."""
        r = np.asarray(r, float)
        cols = [np.asarray(u, float), np.asarray(du, float)]
        dd = np.asarray(ddu, float) if ddu is not None else np.gradient(cols[1], r)
        dcols = [cols[1], dd]
        if h is not None:
            cols += [np.asarray(h, float), np.asarray(dh, float)]
            dcols += [cols[3], np.gradient(cols[3], r)]
        return cls(r, np.column_stack(cols), np.column_stack(dcols), **kw)


class NoSignChange(ValueError):
    pass


def start_radius(config: SolveConfig, param: ShootParam) -> float:
    """Series start radius, shrunk for large c where the profile scale is 1/sqrt(c)."""
    return config.start_delta * min(1.0, 1.0 / math.sqrt(1.0 + param.c))


def turning_radius(problem: ProblemSpec, param: ShootParam, s: State) -> float:
    """Radius beyond which ``V(r) - (effective attraction)`` is positive.

    There u has no positive maxima and no negative minima, so growth or
    decay is monotone and its fate is locked in.
    """
    c = float(param.c)
    if problem.family is Family.SNH:
        level = max(s.h if s.h is not None else c, 0.0)
    elif not problem.nonlinearity_enabled:
        level = c
    elif problem.family is Family.GP:
        level = c + s.u * s.u
    else:
        level = c + abs(s.u) ** (problem.p - 1.0)
    return level ** (1.0 / problem.potential_exponent) if level > 0 else 0.0


_MONITORS = (EventKind.U_ZERO, EventKind.U_PRIME_ZERO, EventKind.INFLECTION)


def _monitored(kind: EventKind, f, r, y):
    if kind is EventKind.U_ZERO:
        return y[0]
    if kind is EventKind.U_PRIME_ZERO:
        return y[1]
    return f(r, y)[1]


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def _refine(f, r0, y0, r1, kind: EventKind, xtol: float):
    def g(s):
        return _monitored(kind, f, r0 + s, _dopri.advance(f, r0, y0, s))

    h = r1 - r0
    g0 = _monitored(kind, f, r0, y0)
    g1 = g(h)
    if g0 == 0.0:
        return r0, list(y0)
    if g1 == 0.0:
        return r1, _dopri.advance(f, r0, y0, h)
    if g0 * g1 > 0:
        raise NoSignChange(f"{kind.value}: no sign change on [{r0}, {r1}]")
    s = brentq(g, 0.0, h, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return r0 + s, _dopri.advance(f, r0, y0, s)


def _hermite_root(r0, r1, p0, p1, m0, m1):
    """Root of the cubic Hermite interpolant of (p, p') on [r0, r1]."""
    h = r1 - r0

    def p(t):
        t2, t3 = t * t, t * t * t
        return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * h * m1

    t = brentq(p, 0.0, 1.0, xtol=1e-15)
    return r0 + t * h


def refine_event(trajectory: Trajectory, index: int, kind: EventKind) -> Event:
    """Locate the sign change of u, u' or u'' on step ``[r[index], r[index+1]]``.

    Re-integrates sub-steps from the left sample when the ODE is known,
    otherwise interpolates the stored samples.
    """
    if kind not in _MONITORS:
        raise ValueError(f"{kind} is not a sign-change event")
    r0, r1 = float(trajectory.r[index]), float(trajectory.r[index + 1])
    col = {EventKind.U_ZERO: 0, EventKind.U_PRIME_ZERO: 1, EventKind.INFLECTION: 1}[kind]
    src = trajectory.dy if kind is EventKind.INFLECTION else trajectory.y
    a, b = float(src[index, col]), float(src[index + 1, col])
    if a * b > 0 or (a == 0 and b == 0):
        raise NoSignChange(f"{kind.value}: no sign change on [{r0}, {r1}]")
    f = trajectory.rhs_function()
    if f is not None:
        r_ev, y_ev = _refine(f, r0, list(trajectory.y[index]), r1, kind, 8 * np.finfo(float).eps * r1)
        return Event(kind, r_ev, State.from_vector(r_ev, y_ev))
    if kind is EventKind.U_ZERO:
        r_ev = _hermite_root(r0, r1, a, b, trajectory.du[index], trajectory.du[index + 1])
    elif kind is EventKind.U_PRIME_ZERO:
        r_ev = _hermite_root(r0, r1, a, b, trajectory.ddu[index], trajectory.ddu[index + 1])
    else:
        r_ev = r0 + (r1 - r0) * a / (a - b)
    w = (r_ev - r0) / (r1 - r0)
    y_ev = (1 - w) * trajectory.y[index] + w * trajectory.y[index + 1]
    return Event(kind, r_ev, State.from_vector(r_ev, y_ev))


StopRule = Callable[[float, list], "EventKind | None"]


def integrate_system(
    f,
    start: State,
    r_end: float,
    rtol: float,
    atol: float,
    *,
    stop: StopRule | None = None,
    grid: Sequence[float] = (),
    max_steps: int = 10**6,
    system=None,
    config: SolveConfig | None = None,
    track_events: bool = True,
    blowup_sign_fallback: float = 1.0,
) -> Trajectory:
    """Integrate ``y' = f(r, y)`` from ``start`` with refined sign-change events.

    ``stop(r, y)`` may return a terminal :class:`EventKind`.  Reaching
    ``r_end`` or ``max_steps`` ends with ``BudgetExhausted``; a non-finite
    state ends with ``Blowup`` carrying the sign of the last finite u.
    """
    y0 = start.as_list()
    rs = [start.r]
    ys = [list(y0)]
    dys = [f(start.r, y0)]
    events: list[Event] = []
    last = {k: 0 for k in _MONITORS}
    if track_events:
        last[EventKind.U_ZERO] = _sign(y0[0])
        last[EventKind.U_PRIME_ZERO] = _sign(y0[1])
        last[EventKind.INFLECTION] = _sign(dys[0][1])
    termination = EventKind.BUDGET
    note = ""
    xtol_scale = 8 * np.finfo(float).eps
    try:
        for r_prev, y_prev, r, y, dy in _dopri.steps(f, start.r, y0, r_end, rtol, atol, grid, max_steps):
            if not all(math.isfinite(v) for v in y):
                raise _dopri.NonFiniteState(r_prev, y_prev)
            rs.append(r)
            ys.append(y)
            dys.append(dy)
            if track_events:
                found = []
                for kind, val in ((EventKind.U_ZERO, y[0]), (EventKind.U_PRIME_ZERO, y[1]), (EventKind.INFLECTION, dy[1])):
                    sg = _sign(val)
                    if sg == 0:
                        continue
                    if last[kind] != 0 and sg != last[kind]:
                        prev_val = _monitored(kind, f, r_prev, y_prev)
                        if prev_val == 0.0:
                            r_ev, y_ev = r_prev, y_prev
                        else:
                            r_ev, y_ev = _refine(f, r_prev, y_prev, r, kind, xtol_scale * r)
                        found.append(Event(kind, r_ev, State.from_vector(r_ev, y_ev)))
                    last[kind] = sg
                found.sort(key=lambda e: e.r)
                events.extend(found)
            if stop is not None:
                kind = stop(r, y)
                if kind is not None:
                    termination = kind
                    break
    except _dopri.NonFiniteState as exc:
        termination = EventKind.BLOWUP
        note = f"non-finite state beyond r={exc.r:.17g}"
    end = State.from_vector(rs[-1], ys[-1])
    if termination is EventKind.BLOWUP and note:
        sgn = _sign(ys[-1][0]) or (1 if blowup_sign_fallback >= 0 else -1)
        end = State.from_vector(rs[-1], [math.copysign(math.inf, sgn)] + list(ys[-1][1:]))
    events.append(Event(termination, rs[-1], end, note))
    return Trajectory(
        np.array(rs),
        np.array(ys),
        np.array(dys),
        tuple(events),
        termination,
        system,
        config if config is not None else SolveConfig(),
        {"note": note} if note else {},
    )


def integrate_shot(
    problem: ProblemSpec,
    param: ShootParam,
    config: SolveConfig | None = None,
    grid: Sequence[float] = (),
) -> Trajectory:
    """Integrate one shot ``u_c`` from the series start until its fate is clear."""
    config = config or SolveConfig()
    if not isinstance(config, SolveConfig):
        raise TypeError("config must be a SolveConfig")
    delta = start_radius(config, param)
    start = series_start(problem, param, delta)
    b = problem.b
    r_arm = max(turning_radius(problem, param, start), delta)
    blow = config.blowup_factor * b
    du_tol, u_tol = config.decay_du_tol * b, config.decay_u_tol * b

    def stop(r, y):
        if r <= r_arm:
            return None
        u, du = y[0], y[1]
        if abs(u) > blow and u * du > 0:
            return EventKind.BLOWUP
        if abs(u) < u_tol and abs(du) < du_tol and u * du <= 0:
            return EventKind.DECAY
        return None

    traj = integrate_system(
        make_rhs(problem, param),
        start,
        config.r_max,
        config.rel_tol,
        config.abs_tol,
        stop=stop,
        grid=grid,
        max_steps=config.max_steps,
        system=ShotSystem(problem, param),
        config=config,
    )
    traj.meta.update(start_delta=delta, arm_radius=r_arm)
    return traj


def sample_limiting(d: int, b: float, x_max: float, n_samples: int, rtol: float = 1e-12, atol: float = 1e-14) -> Trajectory:
    """Limiting Bessel-type profile sampled on a uniform grid (plus step points)."""
    delta = min(1e-4, x_max / 10)
    u2 = -b / (2 * d)
    start = State(delta, b + u2 * delta**2, 2 * u2 * delta)
    grid = np.linspace(0.0, x_max, n_samples)[1:]
    traj = integrate_system(
        limiting_rhs(d),
        start,
        x_max,
        rtol,
        atol,
        grid=grid,
        system=LimitSystem(d),
    )
    traj.meta.update(grid=grid, bessel_order=d / 2 - 1)
    return traj
