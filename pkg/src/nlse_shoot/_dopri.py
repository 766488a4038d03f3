"""Dormand-Prince 5(4) stepping on plain Python lists.

States here have two or four components, so list arithmetic beats numpy
array overhead by a wide margin.  The controller follows Hairer's DOPRI5
(PI control with beta = 0.04, local extrapolation).
"""
from __future__ import annotations

import math

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th minus embedded 4th order weights
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFETY = 0.9
BETA = 0.04
EXPO1 = 0.2 - 0.75 * BETA
FAC_MIN, FAC_MAX = 0.2, 10.0


class NonFiniteState(ArithmeticError):
    """Raised when the solution leaves the floating-point range."""

    def __init__(self, r, y):
        super().__init__(f"non-finite state at r={r!r}")
        self.r = r
        self.y = y


def step(f, r, y, h, k1):
    """One DP5 step; returns ``(y_new, err_vec, k7)`` with ``k7 = f(r+h, y_new)``."""
    n = len(y)
    rng = range(n)
    k2 = f(r + C2 * h, [y[i] + h * A21 * k1[i] for i in rng])
    k3 = f(r + C3 * h, [y[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in rng])
    k4 = f(r + C4 * h, [y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in rng])
    k5 = f(r + C5 * h, [y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]) for i in rng])
    k6 = f(r + h, [y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]) for i in rng])
    y_new = [y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]) for i in rng]
    k7 = f(r + h, y_new)
    err = [h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]) for i in rng]
    return y_new, err, k7


def advance(f, r, y, h):
    """State at ``r + h`` from a single step (used for event refinement and quadrature nodes)."""
    return step(f, r, y, h, f(r, y))[0]


def error_norm(err, y0, y1, rtol, atol):
    acc = 0.0
    for e, a, b in zip(err, y0, y1):
        sc = atol + rtol * max(abs(a), abs(b))
        acc += (e / sc) ** 2
    return math.sqrt(acc / len(err))


def initial_step(f, r0, y0, f0, rtol, atol, h_max):
    sc = [atol + rtol * abs(v) for v in y0]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y0, sc)) / len(y0))
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(f0, sc)) / len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    y1 = [a + h0 * b for a, b in zip(y0, f0)]
    f1 = f(r0 + h0, y1)
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, sc)) / len(y0)) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1, h_max)


def steps(f, r0, y0, r_end, rtol, atol, grid=(), max_steps=10**6, h_max=math.inf):
    """Yield accepted steps ``(r_prev, y_prev, r, y, dy)`` from ``r0`` up to ``r_end``.

    Every radius in ``grid`` inside ``(r0, r_end]`` becomes a step endpoint.
    Raises :class:`NonFiniteState` if the step size collapses on non-finite
    trial states.  Stops silently after ``max_steps`` accepted steps.
    """
    r, y = float(r0), [float(v) for v in y0]
    k1 = f(r, y)
    h_max = min(h_max, r_end - r0)
    h = initial_step(f, r, y, k1, rtol, atol, h_max)
    marks = sorted({float(g) for g in grid if r0 < g < r_end})
    marks.append(r_end)
    mi = 0
    facold = 1e-4
    accepted = 0
    while accepted < max_steps and r < r_end:
        target = marks[mi]
        h_free = h
        hit = r + h >= target
        if hit:
            h = target - r
        y_new, err, k7 = step(f, r, y, h, k1)
        e = error_norm(err, y, y_new, rtol, atol)
        if not math.isfinite(e):
            h *= 0.1
            if h < 1e-14 * max(1.0, abs(r)):
                raise NonFiniteState(r, y)
            continue
        fac11 = e**EXPO1
        if e <= 1.0:
            fac = fac11 / facold**BETA
            fac = min(1 / FAC_MIN, max(1 / FAC_MAX, fac / SAFETY))
            h_next = min(h / fac, h_max)
            if hit:
                h_next = max(h_next, min(h_free, h_max))
            facold = max(e, 1e-4)
            r_prev, y_prev = r, y
            r = target if hit else r + h
            y, k1 = y_new, k7
            accepted += 1
            if hit:
                mi += 1
            yield r_prev, y_prev, r, y, k7
            h = h_next
        else:
            h /= min(1 / FAC_MIN, fac11 / SAFETY)
            if h < 1e-14 * max(1.0, abs(r)):
                raise NonFiniteState(r, y)
