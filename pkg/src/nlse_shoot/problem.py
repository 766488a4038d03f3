"""Radial equation families, their first-order form and the start-up at r = 0.

Every family is written as

    u'' + (d-1)/r u' - V(r) u + F_c(r, u) = 0,   u(0) = b,  u'(0) = 0,

with V(r) = r**s.  The Schrodinger-Newton-Hooke (SNH) family carries the
auxiliary field h = omega - v, so its state is (u, u', h, h') and the
shooting parameter is h(0).  For the Gross-Pitaevskii (GP) and power
families the shooting parameter is the frequency itself.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

__all__ = [
    "Family",
    "ProblemSpec",
    "ShootParam",
    "State",
    "RescaledProblem",
    "make_rhs",
    "rhs",
    "series_coefficients",
    "series_start",
    "rescale",
    "limiting_rhs",
    "limiting_solution",
    "bessel_order",
]


class Family(str, enum.Enum):
    SNH = "snh"
    GP = "gp"
    POWER = "power"


@dataclass(frozen=True)
class ProblemSpec:
    """One radial equation family in dimension ``d`` with central value ``b``.

    ``nonlinearity_enabled=False`` turns every family into the linear
    harmonic oscillator ``u'' + (d-1)/r u' - r^s u + c u = 0``, whose radial
    spectrum ``omega = d + 4n`` (for s = 2) is known in closed form.
    """

    family: Family
    d: int
    b: float
    p: float = 3.0
    potential_exponent: float = 2.0
    nonlinearity_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be an integer >= 1, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"central value b must be positive and finite, got {self.b!r}")
        if self.family is Family.POWER and not self.p > 1:
            raise ValueError(f"power nonlinearity needs p > 1, got {self.p!r}")
        if not self.potential_exponent > 0:
            raise ValueError("potential exponent must be positive")

    @property
    def dim(self) -> int:
        return 4 if self.family is Family.SNH else 2

    @property
    def is_linear(self) -> bool:
        return not self.nonlinearity_enabled

    def with_b(self, b: float) -> "ProblemSpec":
        return replace(self, b=b)

    def potential(self, r: float) -> float:
        s = self.potential_exponent
        return r * r if s == 2.0 else r**s


@dataclass(frozen=True)
class ShootParam:
    """Shooting parameter: ``h(0)`` for SNH, the frequency for GP / power."""

    c: float

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ValueError(f"shooting parameter must be finite and >= 0, got {self.c!r}")


@dataclass(frozen=True)
class State:
    r: float
    u: float
    du: float
    h: float | None = None
    dh: float | None = None

    def as_list(self) -> list[float]:
        if self.h is None:
            return [self.u, self.du]
        return [self.u, self.du, self.h, self.dh]

    @classmethod
    def from_vector(cls, r: float, y: Sequence[float]) -> "State":
        if len(y) == 4:
            return cls(float(r), float(y[0]), float(y[1]), float(y[2]), float(y[3]))
        return cls(float(r), float(y[0]), float(y[1]))


def make_rhs(problem: ProblemSpec, param: ShootParam) -> Callable[[float, list], list]:
    """Return ``f(r, y)`` for the first-order system; valid for r > 0 only."""
    dm1 = problem.d - 1.0
    c = float(param.c)
    s = problem.potential_exponent
    square = s == 2.0
    nonlinear = problem.nonlinearity_enabled

    if problem.family is Family.SNH:
        if nonlinear:
            def f(r, y):
                u, du, h, dh = y
                V = r * r if square else r**s
                return [du, -dm1 / r * du + V * u - h * u, dh, -dm1 / r * dh - u * u]
        else:
            def f(r, y):
                u, du, h, dh = y
                V = r * r if square else r**s
                return [du, -dm1 / r * du + V * u - h * u, dh, -dm1 / r * dh]
        return f

    if not nonlinear:
        def f(r, y):
            u, du = y
            V = r * r if square else r**s
            return [du, -dm1 / r * du + (V - c) * u]
        return f

    if problem.family is Family.GP:
        def f(r, y):
            u, du = y
            V = r * r if square else r**s
            return [du, -dm1 / r * du + (V - c - u * u) * u]
        return f

    pm1 = problem.p - 1.0

    def f(r, y):
        u, du = y
        V = r * r if square else r**s
        return [du, -dm1 / r * du + (V - c - abs(u) ** pm1) * u]

    return f


def rhs(problem: ProblemSpec, param: ShootParam, s: State) -> State:
    """Derivative of ``s`` as a State (fields hold u', u'', h', h'')."""
    if not s.r > 0:
        raise ValueError("rhs is singular at r = 0; start from series_start instead")
    y = s.as_list()
    if len(y) != problem.dim:
        raise ValueError(f"state has {len(y)} components, problem needs {problem.dim}")
    return State.from_vector(s.r, make_rhs(problem, param)(s.r, y))


def _nonlinear_value(problem: ProblemSpec, c: float, u: float) -> float:
    """F_c(0, u) for the non-SNH families."""
    if not problem.nonlinearity_enabled:
        return c * u
    if problem.family is Family.GP:
        return u**3 + c * u
    return abs(u) ** (problem.p - 1.0) * u + c * u


def series_coefficients(problem: ProblemSpec, param: ShootParam) -> tuple[float, float]:
    """Second-order Taylor coefficients ``(u2, h2)`` at the origin.

    ``u(r) = b + u2 r^2 + O(r^4)``; ``h2`` is 0 for non-SNH families.  Since
    V(0) = 0, evaluating the equation at r = 0 gives ``d * u''(0) = -F_c(0, b)``.
    """
    b, d, c = problem.b, problem.d, float(param.c)
    if problem.family is Family.SNH:
        u2 = -b * c / (2 * d)
        h2 = -b * b / (2 * d) if problem.nonlinearity_enabled else 0.0
        return u2, h2
    return -_nonlinear_value(problem, c, b) / (2 * d), 0.0


def series_start(problem: ProblemSpec, param: ShootParam, delta: float) -> State:
    if not delta > 0:
        raise ValueError("start radius must be positive")
    u2, h2 = series_coefficients(problem, param)
    b = problem.b
    u, du = b + u2 * delta**2, 2 * u2 * delta
    if problem.family is Family.SNH:
        c = float(param.c)
        return State(delta, u, du, c + h2 * delta**2, 2 * h2 * delta)
    return State(delta, u, du)


@dataclass(frozen=True)
class RescaledProblem:
    """A problem written in ``x = sqrt(c) r`` with ``u~(x) = u(r)``.

    SNH also rescales ``h~ = h / c``.  The rescaled equations are

        SNH: u~'' + (d-1)/x u~' - eps_potential x^2 u~ + h~ u~ = 0,
             h~'' + (d-1)/x h~' + eps_coupling u~^2 = 0,  h~(0) = 1;
        GP:  u~'' + (d-1)/x u~' - eps_potential x^2 u~ + eps_nonlinear u~^3 + u~ = 0,

    with ``eps_potential = 1/c^2``, ``eps_coupling = 1/c^2`` and
    ``eps_nonlinear = 1/c``.  Setting the small coefficients to zero gives the
    Bessel-type limiting equation.
    """

    problem: ProblemSpec
    c: float
    eps_potential: float
    eps_coupling: float
    eps_nonlinear: float

    @property
    def scale(self) -> float:
        return math.sqrt(self.c)

    def forward(self, s: State) -> State:
        k = self.scale
        if s.h is None:
            return State(s.r * k, s.u, s.du / k)
        return State(s.r * k, s.u, s.du / k, s.h / self.c, s.dh / (self.c * k))

    def backward(self, s: State) -> State:
        k = self.scale
        if s.h is None:
            return State(s.r / k, s.u, s.du * k)
        return State(s.r / k, s.u, s.du * k, s.h * self.c, s.dh * self.c * k)

    def make_rhs(self, keep_small_terms: bool = True) -> Callable[[float, list], list]:
        dm1 = self.problem.d - 1.0
        ep = self.eps_potential if keep_small_terms else 0.0
        if self.problem.family is Family.SNH:
            ec = self.eps_coupling if keep_small_terms else 0.0

            def f(x, y):
                u, du, h, dh = y
                return [du, -dm1 / x * du + ep * x * x * u - h * u, dh, -dm1 / x * dh - ec * u * u]

            return f
        en = self.eps_nonlinear if keep_small_terms else 0.0

        def f(x, y):
            u, du = y
            return [du, -dm1 / x * du + (ep * x * x - en * u * u - 1.0) * u]

        return f

    def start(self, delta: float, keep_small_terms: bool = True) -> State:
        """Taylor state at ``x = delta`` (the potential term vanishes at order x^2)."""
        b, d = self.problem.b, self.problem.d
        if self.problem.family is Family.SNH:
            ec = self.eps_coupling if keep_small_terms else 0.0
            u2, h2 = -b / (2 * d), -ec * b * b / (2 * d)
            return State(delta, b + u2 * delta**2, 2 * u2 * delta, 1.0 + h2 * delta**2, 2 * h2 * delta)
        en = self.eps_nonlinear if keep_small_terms else 0.0
        u2 = -(b + en * b**3) / (2 * d)
        return State(delta, b + u2 * delta**2, 2 * u2 * delta)


def rescale(problem: ProblemSpec, param: ShootParam) -> RescaledProblem:
    if problem.family is Family.POWER:
        raise ValueError("rescaling is defined for the SNH and GP families")
    if problem.potential_exponent != 2.0 or not problem.nonlinearity_enabled:
        raise ValueError("rescaling assumes the harmonic nonlinear problem")
    c = float(param.c)
    if not c > 0:
        raise ValueError("rescaling needs c > 0")
    return RescaledProblem(problem, c, 1.0 / c**2, 1.0 / c**2, 1.0 / c)


def limiting_rhs(d: int) -> Callable[[float, list], list]:
    """``u'' + (d-1)/x u' + u = 0``, the c -> infinity limit for both families."""
    dm1 = d - 1.0

    def f(x, y):
        u, du = y
        return [du, -dm1 / x * du - u]

    return f


def bessel_order(d: int) -> float:
    """Order of the Bessel function J_nu with u~(x) = x^(1-d/2) J_nu(x) / const."""
    return d / 2.0 - 1.0


def limiting_solution(d: int, b: float, x_max: float, n_samples: int, rtol: float = 1e-12, atol: float = 1e-14):
    """Integrate the limiting equation on ``[0, x_max]`` and sample it uniformly.

    Returns a :class:`~nlse_shoot.integrate.Trajectory` with refined zero
    crossings as ``UZero`` events; no special functions are involved.
    """
    from .integrate import sample_limiting

    if d < 2:
        raise ValueError("limiting profile needs d >= 2")
    return sample_limiting(d, b, x_max, n_samples, rtol=rtol, atol=atol)
