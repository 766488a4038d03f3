"""Numerical checks of the analytic scaffolding behind the existence argument."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _dopri
from .integrate import (
    EventKind,
    LimitSystem,
    RescaledSystem,
    Trajectory,
    integrate_system,
)
from .problem import Family, ProblemSpec, ShootParam, State, limiting_rhs, rescale, series_coefficients
from .quadrature import cumulative_integral

__all__ = [
    "WrongFamily",
    "WrongParam",
    "DomainTooShort",
    "PohozaevReport",
    "IdentityResidual",
    "AssumptionReport",
    "RescalingRow",
    "ParticleView",
    "pohozaev_terms",
    "check_h_integral",
    "check_u_integral",
    "check_assumptions",
    "rescaling_convergence",
    "gp_particle_view",
]

POHOZAEV_NAMES = ("gradient", "potential", "boundary_du", "boundary_dh", "boundary_h_dh")


class WrongFamily(ValueError):
    pass


class WrongParam(ValueError):
    pass


class DomainTooShort(ValueError):
    pass


def _require_snh(traj: Trajectory):
    if traj.h is None or (traj.problem is not None and traj.problem.family is not Family.SNH):
        raise WrongFamily("this check needs an SNH trajectory")


def _dimension(traj: Trajectory) -> int:
    return traj.problem.d if traj.problem is not None else int(traj.meta["d"])


def _cut_at(traj: Trajectory, R: float) -> Trajectory:
    """Samples up to ``R`` with an exact sample appended at ``R``."""
    if not traj.r[0] < R <= traj.r[-1]:
        raise ValueError(f"R={R} outside the trajectory domain ({traj.r[0]}, {traj.r[-1]}]")
    k = int(np.searchsorted(traj.r, R, side="left"))
    if traj.r[k] == R:
        return traj.truncated(R)
    f = traj.rhs_function()
    r0 = float(traj.r[k - 1])
    if f is not None:
        y_new = np.array(_dopri.advance(f, r0, list(traj.y[k - 1]), R - r0))
        dy_new = np.array(f(R, list(y_new)))
    else:
        w = (R - r0) / (traj.r[k] - r0)
        y_new = (1 - w) * traj.y[k - 1] + w * traj.y[k]
        dy_new = (1 - w) * traj.dy[k - 1] + w * traj.dy[k]
    return Trajectory(
        np.append(traj.r[:k], R),
        np.vstack([traj.y[:k], y_new]),
        np.vstack([traj.dy[:k], dy_new]),
        (),
        traj.termination,
        traj.system,
        traj.config,
        dict(traj.meta),
    )


@dataclass(frozen=True)
class PohozaevReport:
    """Terms of the c = 0 SNH identity, in the order

    (d-6) int u'^2 r^(d-1),  (d+2) int r^2 u^2 r^(d-1),  2 u'(R)^2 R^d,
    h'(R)^2 R^d,  (d-2) h(R) h'(R) R^(d-1).
    """

    R: float
    terms: dict[str, float]
    quadrature_error: dict[str, float]
    total: float

    def values(self) -> list[float]:
        return [self.terms[k] for k in POHOZAEV_NAMES]


def pohozaev_terms(traj: Trajectory, R: float) -> PohozaevReport:
    _require_snh(traj)
    if traj.param is not None and traj.param.c != 0:
        raise WrongParam("the identity is derived for h(0) = 0")
    d = _dimension(traj)
    part = _cut_at(traj, R)
    r0 = float(part.r[0])
    if not np.any(part.u) and not np.any(part.du):
        zero = dict.fromkeys(POHOZAEV_NAMES, 0.0)
        return PohozaevReport(R, zero, dict(zero), 0.0)
    u0, du0 = float(part.u[0]), float(part.du[0])
    grad = cumulative_integral(part, lambda r, Y: Y[..., 1] ** 2 * r ** (d - 1),
                               origin=du0 * du0 * r0**d / (d + 2))
    pot = cumulative_integral(part, lambda r, Y: r**2 * Y[..., 0] ** 2 * r ** (d - 1),
                              origin=u0 * u0 * r0 ** (d + 2) / (d + 2))
    uR, duR, hR, dhR = part.y[-1]
    terms = {
        "gradient": (d - 6) * float(grad.value[-1]),
        "potential": (d + 2) * float(pot.value[-1]),
        "boundary_du": 2 * duR**2 * R**d,
        "boundary_dh": dhR**2 * R**d,
        "boundary_h_dh": (d - 2) * hR * dhR * R ** (d - 1),
    }
    err = {k: 0.0 for k in POHOZAEV_NAMES}
    err["gradient"] = abs(d - 6) * float(grad.error[-1])
    err["potential"] = (d + 2) * float(pot.error[-1])
    return PohozaevReport(R, terms, err, float(sum(terms.values())))


@dataclass(frozen=True)
class IdentityResidual:
    kind: str
    radii: np.ndarray
    residuals: np.ndarray
    direct: np.ndarray = field(repr=False, default=None)
    integral: np.ndarray = field(repr=False, default=None)

    @property
    def max(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0


def _residual(kind, traj, direct, integral, floor_rel):
    scale = float(np.max(np.abs(direct))) if len(direct) else 0.0
    if scale == 0.0:
        res = np.abs(direct - integral)
    else:
        res = np.abs(direct - integral) / np.maximum(np.abs(direct), floor_rel * scale)
    return IdentityResidual(kind, traj.r.copy(), res, direct, integral)


def check_h_integral(traj: Trajectory, floor_rel: float = 1e-3) -> IdentityResidual:
    """Compare stored h' with ``-r^(1-d) int_0^r u^2 s^(d-1) ds``.

    Residuals are relative to ``max(|h'|, floor_rel * max|h'|)``.
    """
    _require_snh(traj)
    d = _dimension(traj)
    r0, u0 = float(traj.r[0]), float(traj.u[0])
    cum = cumulative_integral(traj, lambda r, Y: Y[..., 0] ** 2 * r ** (d - 1), origin=u0 * u0 * r0**d / d)
    integral = -cum.value * traj.r ** (1 - d)
    return _residual("HPrime", traj, traj.dh.copy(), integral, floor_rel)


def check_u_integral(traj: Trajectory, floor_rel: float = 1e-3) -> IdentityResidual:
    """Compare stored u' with ``r^(1-d) int_0^r (s^2 - h) u s^(d-1) ds``."""
    _require_snh(traj)
    d = _dimension(traj)
    r0 = float(traj.r[0])
    u0, h0 = float(traj.u[0]), float(traj.h[0])
    s = traj.problem.potential_exponent if traj.problem is not None else 2.0

    def g(r, Y):
        return (r**s - Y[..., 2]) * Y[..., 0] * r ** (d - 1)

    cum = cumulative_integral(traj, g, origin=-h0 * u0 * r0**d / d)
    integral = cum.value * traj.r ** (1 - d)
    return _residual("UPrime", traj, traj.du.copy(), integral, floor_rel)


@dataclass
class AssumptionReport:
    """Findings for the concavity-at-origin and no-stationary-inflection checks.

    ``concavity_checked`` is False when c = 0 (nothing to check).  A violation
    is a stationary inflection (u' and u'' vanishing together) reached while
    u is positive and has been decreasing.  Ordinary inflections of a
    decreasing profile are listed separately; a decaying bump always has one.
    """

    c: float
    u2: float
    concavity_checked: bool
    concave_at_origin: bool
    snh_datum: float | None
    stationary_inflections: list[float] = field(default_factory=list)
    ordinary_inflections: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.concave_at_origin or not self.concavity_checked) and not self.stationary_inflections


def check_assumptions(traj: Trajectory, stationary_tol: float = 1e-6) -> AssumptionReport:
    problem, param = traj.problem, traj.param
    if problem is None:
        raise ValueError("assumption checks need a trajectory from integrate_shot")
    c = float(param.c)
    u2, _ = series_coefficients(problem, param)
    datum = -problem.b * c / problem.d if problem.family is Family.SNH else None
    checked = c > 0
    rep = AssumptionReport(c, u2, checked, (2 * u2 < 0) if checked else True, datum)
    du_scale = float(np.max(np.abs(traj.du))) or 1.0
    first_cross = next((e.r for e in traj.events if e.kind is EventKind.U_ZERO), np.inf)
    first_ext = next((e.r for e in traj.events if e.kind is EventKind.U_PRIME_ZERO), np.inf)
    for e in traj.events_of(EventKind.INFLECTION):
        s = e.state
        if s.u <= 0 or e.r > first_cross:
            continue
        if abs(s.du) <= stationary_tol * du_scale and e.r <= first_ext * (1 + 1e-9):
            rep.stationary_inflections.append(e.r)
        elif s.du < 0:
            rep.ordinary_inflections.append(e.r)
    return rep


@dataclass(frozen=True)
class RescalingRow:
    c: float
    sup_error: float
    first_crossing: float
    limit_first_crossing: float


def rescaling_convergence(problem: ProblemSpec, b: float, c_list, x_max: float, n_grid: int = 2001,
                          rtol: float = 1e-12, atol: float = 1e-14, delta: float = 1e-4) -> list[RescalingRow]:
    """Sup-norm gap between the rescaled shot and the Bessel-type limit on ``[0, x_max]``.

    The dropped terms carry 1/c^2, so the gap should fall about 4x per doubling of c.
    """
    c_list = [float(c) for c in c_list]
    if any(b2 <= b1 for b1, b2 in zip(c_list, c_list[1:])):
        raise ValueError("c_list must be increasing")
    p = problem.with_b(b)
    grid = np.linspace(0.0, x_max, n_grid)[1:]
    u2 = -b / (2 * p.d)
    lim = integrate_system(limiting_rhs(p.d), State(delta, b + u2 * delta**2, 2 * u2 * delta), x_max, rtol, atol,
                           grid=grid, system=LimitSystem(p.d))
    lim_zero = next((e.r for e in lim.events if e.kind is EventKind.U_ZERO), np.nan)
    on_grid_lim = np.isin(lim.r, grid)
    rows = []
    for c in c_list:
        rp = rescale(p, ShootParam(c))
        tr = integrate_system(rp.make_rhs(True), rp.start(delta), x_max, rtol, atol, grid=grid,
                              system=RescaledSystem(rp, True))
        if tr.r[-1] < x_max:
            raise DomainTooShort(f"rescaled shot at c={c} stopped at {tr.r[-1]}")
        on_grid = np.isin(tr.r, grid)
        err = float(np.max(np.abs(tr.u[on_grid] - lim.u[on_grid_lim])))
        zero = next((e.r for e in tr.events if e.kind is EventKind.U_ZERO), np.nan)
        rows.append(RescalingRow(c, err, zero, lim_zero))
    return rows


@dataclass(frozen=True)
class ParticleView:
    """``t = r^2/2``, ``w = u/r``: a damped particle in a time-dependent well."""

    t: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    ddw: np.ndarray
    potential: np.ndarray
    energy: np.ndarray
    residual: np.ndarray
    frozen_energy_increases: int

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual))


def gp_particle_view(traj: Trajectory, omega: float | None = None) -> ParticleView:
    """Map a GP shot to the particle picture and check the transformed equation.

    ``residual`` is relative to the largest term of the w-equation at each sample.
    """
    problem = traj.problem
    if problem is None or problem.family is not Family.GP or not problem.nonlinearity_enabled:
        raise WrongFamily("particle view is defined for the cubic GP family")
    d = problem.d
    om = float(traj.param.c) if omega is None else float(omega)
    r, u, du, ddu = traj.r, traj.u, traj.du, traj.ddu
    t = r**2 / 2
    w = u / r
    dw = (r * du - u) / r**3
    ddw = ddu / r**3 - 3 * (r * du - u) / r**5
    coef = (d - 1) / (8 * t**2) + om / (4 * t)
    U = w**4 / 4 - w**2 / 2 + coef * w**2
    E = dw**2 / 2 + U
    terms = np.stack([
        ddw,
        (d + 2) / (2 * t) * dw,
        w**3,
        -w,
        (d - 1) / (4 * t**2) * w,
        om / (2 * t) * w,
    ])
    scale = np.max(np.abs(terms), axis=0)
    residual = np.abs(terms.sum(axis=0)) / np.where(scale > 0, scale, 1.0)
    # energy with the well frozen at the left end of each step
    E_left = dw[:-1] ** 2 / 2 + w[:-1] ** 4 / 4 - w[:-1] ** 2 / 2 + coef[:-1] * w[:-1] ** 2
    E_right = dw[1:] ** 2 / 2 + w[1:] ** 4 / 4 - w[1:] ** 2 / 2 + coef[:-1] * w[1:] ** 2
    increases = int(np.sum(E_right - E_left > 1e-12 * np.maximum(1.0, np.abs(E_left))))
    return ParticleView(t, w, dw, ddw, U, E, residual, increases)
