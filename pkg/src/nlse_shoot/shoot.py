"""Bisection for ground and excited states, frequency recovery and mass.

The ground state is ``c0 = inf I`` where I is the set of parameters whose
shot hits zero while still positive and decreasing.  Below c0 shots stay
positive and turn upward, above it they cross, so a bracket ``[c_lo, c_hi]``
with ``c_lo`` outside I and ``c_hi`` inside is shrunk by plain bisection.
Excited states bisect the crossing count instead.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .classify import Classification, classify, in_excited_set, in_ground_set
from .integrate import EventKind, SolveConfig, Trajectory, integrate_shot
from .problem import Family, ProblemSpec, ShootParam
from .quadrature import cumulative_integral

log = logging.getLogger(__name__)

__all__ = [
    "BracketNotFound",
    "ToleranceNotReached",
    "NotDecayed",
    "GroundStateResult",
    "ExcitedResult",
    "SweepRecord",
    "certified_lower_bound",
    "bracket_initial",
    "find_ground",
    "find_excited",
    "recover_omega",
    "mass",
    "sweep_omega_of_b",
]


class BracketNotFound(RuntimeError):
    pass


class ToleranceNotReached(RuntimeError):
    pass


class NotDecayed(ValueError):
    pass


@dataclass(frozen=True)
class GroundStateResult:
    """Converged bracket and the profile cut at its departure radius.

    The decaying solution itself cannot be followed at finite precision;
    ``profile`` is the shot at ``profile_c`` (the in-set end of a bracket
    polished down to a few ulps) cut where it starts to peel away from the
    other end of that bracket.
    """

    problem: ProblemSpec
    c_lo: float
    c_hi: float
    c0: float
    profile: Trajectory
    omega: float
    mass: float
    iterations: int
    profile_c: float
    truncation_radius: float
    history: tuple[tuple[float, float], ...] = ()
    certified_lower: bool = True
    status: str = "ok"


@dataclass(frozen=True)
class ExcitedResult(GroundStateResult):
    n: int = 1
    crossing_radii: tuple[float, ...] = ()
    structure_ok: bool = False


@dataclass(frozen=True)
class SweepRecord:
    b: float
    c0: float
    omega: float
    mass: float
    truncation_radius: float
    iterations: int
    status: str = "ok"

    STATUSES = ("ok", "bracket_failed", "budget_exhausted")


def certified_lower_bound(problem: ProblemSpec) -> bool:
    """True when c = 0 is known to lie outside I (positive u_0).

    SNH needs d >= 6 and GP d >= 4 (the Pohozaev sign argument); for
    ``|u|^(p-1) u`` the same argument needs ``p >= (d+2)/(d-2)``.  The linear
    oscillator at c = 0 sits below its lowest eigenvalue d.
    """
    if not problem.nonlinearity_enabled:
        return True
    if problem.potential_exponent != 2.0:
        return False
    d = problem.d
    if problem.family is Family.SNH:
        return d >= 6
    if problem.family is Family.GP:
        return d >= 4
    return d > 2 and problem.p >= (d + 2) / (d - 2)


def _shot(problem: ProblemSpec, c: float, config: SolveConfig) -> Classification:
    return classify(integrate_shot(problem, ShootParam(c), config), config)


def _ground_pred(cl: Classification) -> bool:
    return in_ground_set(cl)


def _excited_pred(n: int) -> Callable[[Classification], bool]:
    return lambda cl: len(cl.crossings) >= n + 1


def _bracket(problem, config, pred, c_lo, probe, guess=None):
    certified = c_lo is None and certified_lower_bound(problem)
    if c_lo is None:
        if not certified and not probe:
            raise BracketNotFound(
                f"c = 0 is not certified outside the set for {problem.family.value} d={problem.d}; "
                "pass c_lo explicitly or probe=True"
            )
        c_lo = 0.0
    if pred(_shot(problem, c_lo, config)):
        raise BracketNotFound(f"lower end c={c_lo} already satisfies the predicate")
    c = float(guess) if guess is not None else max(float(problem.d), 2 * c_lo, 1.0)
    for _ in range(config.max_doublings):
        if c > c_lo:
            if pred(_shot(problem, c, config)):
                return c_lo, c, certified
            c_lo = c
        c *= 2.0
    raise BracketNotFound(f"no upper bracket after {config.max_doublings} doublings (last c={c})")


def bracket_initial(problem: ProblemSpec, b: float | None = None, config: SolveConfig | None = None,
                    c_lo: float | None = None, probe: bool = False) -> tuple[float, float]:
    """``(c_lo, c_hi)`` with c_lo outside I and c_hi inside, by doubling from c = d."""
    config = config or SolveConfig()
    if b is not None:
        problem = problem.with_b(b)
    lo, hi, _ = _bracket(problem, config, _ground_pred, c_lo, probe)
    return lo, hi


def _bisect(problem, config, pred, lo, hi, c_tol):
    history = [(lo, hi)]
    it = 0
    while hi - lo > c_tol:
        if it >= config.max_bisections:
            raise ToleranceNotReached(f"bracket width {hi - lo:g} after {it} bisections")
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise ToleranceNotReached(f"bracket [{lo!r}, {hi!r}] cannot be split further")
        if pred(_shot(problem, mid, config)):
            hi = mid
        else:
            lo = mid
        it += 1
        history.append((lo, hi))
    return lo, hi, it, history


def _polish(problem, config, pred, lo, hi, max_iter=80):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if pred(_shot(problem, mid, config)):
            hi = mid
        else:
            lo = mid
    return lo, hi


def _departure_profile(problem, config, lo, hi, n_cross):
    """Shot at ``hi`` cut where it separates from the shot at ``lo``."""
    t_lo = integrate_shot(problem, ShootParam(lo), config)
    t_hi = integrate_shot(problem, ShootParam(hi), config, grid=t_lo.r)
    idx = np.searchsorted(t_hi.r, t_lo.r)
    idx = np.minimum(idx, len(t_hi.r) - 1)
    common = t_hi.r[idx] == t_lo.r
    u_tol = config.decay_u_tol * problem.b
    R = None
    crossed = 0
    cross_r = [e.r for e in t_hi.events_of(EventKind.U_ZERO)]
    for k in np.nonzero(common)[0]:
        j = idx[k]
        r = t_hi.r[j]
        crossed = sum(1 for x in cross_r if x <= r)
        if crossed > n_cross:
            break
        u_h, u_l = t_hi.u[j], t_lo.u[k]
        if abs(u_h - u_l) > config.tube_rel * abs(u_h) or abs(u_h) < u_tol:
            break
        R = float(r)
    if R is None or R <= t_hi.r[1]:
        raise ToleranceNotReached("bracketing shots separate immediately; tighten the bracket")
    return t_hi.truncated(R, EventKind.DECAY, truncated=True, profile_c=hi, partner_c=lo)


def _finish(problem, config, lo, hi, it, history, certified, pred, n_cross, cls=GroundStateResult, **extra):
    plo, phi = _polish(problem, config, pred, lo, hi)
    profile = _departure_profile(problem, config, plo, phi, n_cross)
    R = profile.r_end
    om = recover_omega(profile)
    m = mass(profile, problem.d)
    return cls(
        problem=problem, c_lo=lo, c_hi=hi, c0=0.5 * (lo + hi), profile=profile, omega=om, mass=m,
        iterations=it, profile_c=phi, truncation_radius=R, history=tuple(history), certified_lower=certified,
        **extra,
    )


def find_ground(problem: ProblemSpec, config: SolveConfig | None = None, c_tol: float = 1e-10,
                bracket: tuple[float, float] | None = None, c_lo: float | None = None,
                probe: bool = False) -> GroundStateResult:
    config = config or SolveConfig()
    if bracket is None:
        lo, hi, certified = _bracket(problem, config, _ground_pred, c_lo, probe)
    else:
        lo, hi = map(float, bracket)
        certified = False
    lo, hi, it, history = _bisect(problem, config, _ground_pred, lo, hi, c_tol)
    return _finish(problem, config, lo, hi, it, history, certified, _ground_pred, 0)


def find_excited(problem: ProblemSpec, n: int, config: SolveConfig | None = None, c_tol: float = 1e-10,
                 c_lo: float | None = None, probe: bool = False) -> ExcitedResult:
    """State with exactly ``n`` zero crossings, on the boundary of the crossing count."""
    if n < 1:
        raise ValueError("excited states need n >= 1; use find_ground for n = 0")
    config = config or SolveConfig()
    pred = _excited_pred(n)
    lo, hi, certified = _bracket(problem, config, pred, c_lo, probe,
                                 guess=max(float(problem.d), 1.0) * (1 + n))
    lo, hi, it, history = _bisect(problem, config, pred, lo, hi, c_tol)
    structure = in_excited_set(_shot(problem, hi, config), n)
    res = _finish(problem, config, lo, hi, it, history, certified, pred, n, cls=ExcitedResult, n=n)
    crossings = tuple(e.r for e in res.profile.events_of(EventKind.U_ZERO))
    status = "ok" if len(crossings) == n else "crossing_mismatch"
    return replace(res, crossing_radii=crossings, structure_ok=structure, status=status)


def recover_omega(profile: Trajectory, radius: float | None = None) -> float:
    """Frequency of a decayed profile.

    SNH: ``omega = lim h``.  Past R, ``(r^(d-1) h')' = -r^(d-1) u^2`` gives

        h(inf) = h(R) + R h'(R)/(d-2) - 1/(d-2) * int_R^inf t u(t)^2 dt,

    and the last integral is closed with ``u ~ u(R) exp(k (t-R))``,
    ``k = u'(R)/u(R)``.  GP and power: omega is the shooting parameter.
    """
    if profile.termination is not EventKind.DECAY:
        raise NotDecayed(f"profile ended with {profile.termination.value}")
    problem, param = profile.problem, profile.param
    if problem is not None and problem.family is not Family.SNH:
        return float(param.c)
    if profile.h is None:
        raise ValueError("SNH profile without h samples")
    if radius is not None:
        profile = profile.truncated(radius)
    d = problem.d if problem is not None else profile.meta["d"]
    if d <= 2:
        raise ValueError("h has no finite limit for d <= 2")
    R = profile.r_end
    u, du = float(profile.u[-1]), float(profile.du[-1])
    h, dh = float(profile.h[-1]), float(profile.dh[-1])
    tail = 0.0
    if u != 0.0:
        k = du / u
        if not k < 0:
            raise NotDecayed("profile tail is not decreasing in |u|")
        tail = u * u * (R / (-2 * k) + 1 / (4 * k * k))
    return h + (R * dh - tail) / (d - 2)


def _tail_mass(profile: Trajectory, d: int) -> float:
    R = profile.r_end
    u, du = float(profile.u[-1]), float(profile.du[-1])
    if u == 0.0:
        return 0.0
    k = du / u
    if not k < 0:
        raise NotDecayed("profile tail is not decreasing in |u|")
    problem = profile.problem
    if problem is None or problem.potential_exponent == 2.0:
        # u ~ u(R) (r/R)^a exp(-(r^2 - R^2)/2), a matched to u'/u at R
        a = R * (k + R)
        g = lambda r: math.exp(-(r * r - R * R) + 2 * a * math.log(r / R)) * r ** (d - 1)
    else:
        g = lambda r: math.exp(2 * k * (r - R)) * r ** (d - 1)
    val, _ = quad(g, R, math.inf, epsabs=0.0, epsrel=1e-10, limit=200)
    return u * u * val


def mass(profile: Trajectory, d: int | None = None) -> float:
    """``int_0^inf u^2 r^(d-1) dr`` over the samples plus a closed tail."""
    if profile.termination is not EventKind.DECAY:
        raise NotDecayed(f"profile ended with {profile.termination.value}")
    if d is None:
        d = profile.problem.d
    if not np.any(profile.u):
        return 0.0
    r0, u0 = float(profile.r[0]), float(profile.u[0])
    cum = cumulative_integral(profile, lambda r, Y: Y[..., 0] ** 2 * r ** (d - 1), origin=u0 * u0 * r0**d / d)
    return float(cum.value[-1]) + _tail_mass(profile, d)


def _sweep_point(args):
    problem, config, c_tol, b = args
    return _record(lambda: find_ground(problem.with_b(b), config, c_tol), b)


def _record(run, b):
    try:
        res = run()
    except BracketNotFound as exc:
        log.warning("b=%g: %s", b, exc)
        return SweepRecord(b, math.nan, math.nan, math.nan, math.nan, 0, "bracket_failed"), None
    except (ToleranceNotReached, NotDecayed) as exc:
        log.warning("b=%g: %s", b, exc)
        return SweepRecord(b, math.nan, math.nan, math.nan, math.nan, 0, "budget_exhausted"), None
    return SweepRecord(b, res.c0, res.omega, res.mass, res.truncation_radius, res.iterations, "ok"), res


def _warm_bracket(problem, config, history, b):
    """Bracket around c0 extrapolated from the previous points, widened on failure."""
    if len(history) >= 2:
        (b0, c0), (b1, c1) = history[-2], history[-1]
        center = c1 + (c1 - c0) * (b - b1) / (b1 - b0)
        half = max(abs(center - c1), 1e-6 * max(abs(c1), 1.0))
    else:
        b1, c1 = history[-1]
        center = c1
        half = 0.05 * max(abs(c1), 1.0) * max(b / b1, b1 / b)
    for _ in range(4):
        lo, hi = max(center - half, 0.0), center + half
        if not in_ground_set(_shot(problem, lo, config)) and in_ground_set(_shot(problem, hi, config)):
            return lo, hi
        half *= 4
    return None


def sweep_omega_of_b(problem: ProblemSpec, b_grid: Sequence[float], config: SolveConfig | None = None,
                     c_tol: float = 1e-10, warm_start: bool = True, threads: int | None = None) -> list[SweepRecord]:
    """Ground states along ``b_grid``; failures become records, never exceptions.

    Sequential sweeps warm-start each bracket from the previous points
    (falling back to a cold bracket when the guess fails).  With
    ``threads > 1`` (default from ``NLSE_SHOOT_THREADS``) points run in
    separate processes with cold brackets.
    """
    b_grid = [float(b) for b in b_grid]
    if not b_grid:
        raise ValueError("b_grid is empty")
    if any(b2 <= b1 for b1, b2 in zip(b_grid, b_grid[1:])):
        raise ValueError("b_grid must be strictly increasing")
    config = config or SolveConfig()
    if threads is None:
        env = os.environ.get("NLSE_SHOOT_THREADS")
        threads = int(env) if env else 1
    if threads > 1 and len(b_grid) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(_sweep_point, [(problem, config, c_tol, b) for b in b_grid]))
        return [rec for rec, _ in out]

    records = []
    history: list[tuple[float, float]] = []
    for b in b_grid:
        p = problem.with_b(b)
        bracket = None
        if warm_start and history:
            bracket = _warm_bracket(p, config, history, b)
        rec, res = _record(lambda: find_ground(p, config, c_tol, bracket=bracket), b)
        if rec.status == "ok":
            history.append((b, res.c0))
        records.append(rec)
    return records
