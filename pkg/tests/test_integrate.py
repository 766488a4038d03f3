from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from nlse_shoot import _dopri
from nlse_shoot.integrate import (
    EventKind,
    NoSignChange,
    SolveConfig,
    Trajectory,
    integrate_shot,
    integrate_system,
    refine_event,
)
from nlse_shoot.problem import Family, ProblemSpec, ShootParam, make_rhs, series_start

LOOSE_DECAY = SolveConfig(decay_u_tol=1e-4, decay_du_tol=1e-3)


def test_dopri_step_is_fifth_order():
    # local error of one step on y' = y scales like h^6
    f = lambda r, y: [y[0]]
    errs = []
    for h in (0.1, 0.05):
        y, _, _ = _dopri.step(f, 0.0, [1.0], h, [1.0])
        errs.append(abs(y[0] - math.exp(h)))
    assert 50 < errs[0] / errs[1] < 80


def test_matches_scipy_dop853_on_snh():
    p = ProblemSpec(Family.SNH, 7, 1.0)
    param = ShootParam(5.0)
    s = series_start(p, param, 1e-4)
    grid = np.linspace(0.5, 3.0, 6)
    ours = integrate_system(make_rhs(p, param), s, 3.0, 1e-12, 1e-14, grid=grid)
    f = make_rhs(p, param)
    ref = solve_ivp(lambda r, y: f(r, list(y)), (s.r, 3.0), s.as_list(), method="DOP853", rtol=1e-13, atol=1e-15,
                    t_eval=grid)
    got = ours.y[np.isin(ours.r, grid)]
    assert np.max(np.abs(got - ref.y.T)) < 1e-9


def test_grid_points_become_step_endpoints():
    p = ProblemSpec(Family.GP, 4, 1.0)
    grid = [0.25, 0.5, 1.0, 1.7]
    tr = integrate_shot(p, ShootParam(3.0), grid=grid)
    assert all(np.any(tr.r == g) for g in grid)


def test_linear_ground_shot_decays():
    p = ProblemSpec(Family.GP, 3, 1.0, nonlinearity_enabled=False)
    tr = integrate_shot(p, ShootParam(3.0), LOOSE_DECAY)
    assert tr.termination is EventKind.DECAY
    # the Gaussian exp(-r^2/2) is the exact solution
    assert np.max(np.abs(tr.u - np.exp(-tr.r**2 / 2))) < 1e-6


def test_linear_node_position():
    p = ProblemSpec(Family.GP, 3, 1.0, nonlinearity_enabled=False)
    tr = integrate_shot(p, ShootParam(7.0), LOOSE_DECAY)
    zeros = [e.r for e in tr.events_of(EventKind.U_ZERO)]
    assert zeros[0] == pytest.approx(math.sqrt(1.5), abs=1e-9)


def test_gp_zero_parameter_blows_up_positive():
    tr = integrate_shot(ProblemSpec(Family.GP, 4, 1.0), ShootParam(0.0))
    assert tr.termination is EventKind.BLOWUP
    assert tr.u[-1] > 0
    assert not tr.events_of(EventKind.U_ZERO)


def test_budget_exhausted():
    tr = integrate_shot(ProblemSpec(Family.SNH, 7, 1.0), ShootParam(50.0), SolveConfig(max_steps=20))
    assert tr.termination is EventKind.BUDGET
    assert len(tr.r) <= 21


def test_trajectory_ends_at_r_max_when_nothing_happens():
    cfg = SolveConfig(r_max=2.0)
    tr = integrate_shot(ProblemSpec(Family.GP, 4, 1.0), ShootParam(3.77), cfg)
    assert tr.r_end == 2.0
    assert tr.termination is EventKind.BUDGET


def test_events_are_sorted_and_refined():
    tr = integrate_shot(ProblemSpec(Family.SNH, 7, 1.0), ShootParam(40.0))
    radii = [e.r for e in tr.events]
    assert radii == sorted(radii)
    for e in tr.events_of(EventKind.U_ZERO):
        assert abs(e.state.u) < 1e-12
    for e in tr.events_of(EventKind.U_PRIME_ZERO):
        assert abs(e.state.du) < 1e-12


def test_refine_event_hermite_fallback():
    r = np.linspace(0.0, 3.0, 61)
    tr = Trajectory.from_samples(r, np.cos(r), -np.sin(r), -np.cos(r))
    i = int(np.searchsorted(r, math.pi / 2)) - 1
    ev = refine_event(tr, i, EventKind.U_ZERO)
    assert ev.r == pytest.approx(math.pi / 2, abs=1e-6)
    with pytest.raises(NoSignChange):
        refine_event(tr, 0, EventKind.U_ZERO)
    with pytest.raises(ValueError):
        refine_event(tr, 0, EventKind.BLOWUP)


def test_truncated_keeps_prefix():
    tr = integrate_shot(ProblemSpec(Family.SNH, 7, 1.0), ShootParam(40.0))
    cut = tr.truncated(1.0)
    assert cut.r_end <= 1.0
    assert all(e.r <= 1.0 for e in cut.events)
    with pytest.raises(ValueError):
        tr.truncated(0.0)


def test_deterministic():
    p = ProblemSpec(Family.SNH, 7, 1.0)
    a = integrate_shot(p, ShootParam(7.08))
    b = integrate_shot(p, ShootParam(7.08))
    assert np.array_equal(a.r, b.r) and np.array_equal(a.y, b.y)
    assert [e.r for e in a.events] == [e.r for e in b.events]


def test_integrate_shot_rejects_bad_config():
    with pytest.raises(TypeError):
        integrate_shot(ProblemSpec(Family.GP, 4, 1.0), ShootParam(1.0), config={"rel_tol": 1e-8})


def test_tightened_config():
    cfg = SolveConfig().tightened(10)
    assert cfg.rel_tol == pytest.approx(1e-11) and cfg.abs_tol == pytest.approx(1e-13)
    assert cfg.r_max == SolveConfig().r_max
