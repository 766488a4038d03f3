from __future__ import annotations

import numpy as np
import pytest

from nlse_shoot.classify import (
    Classification,
    Fate,
    InvalidN,
    classify,
    classify_trajectory,
    crossing_count,
    in_excited_set,
    in_ground_set,
)
from nlse_shoot.integrate import EventKind, SolveConfig, Trajectory, integrate_shot
from nlse_shoot.problem import Family, ProblemSpec, ShootParam


def shot(family, d, c, **kw):
    return classify(integrate_shot(ProblemSpec(Family(family), d, 1.0, **kw), ShootParam(c)))


def test_gp_zero_parameter_never_crosses():
    cl = shot("gp", 4, 0.0)
    assert cl.fate is Fate.DIVERGES_PLUS
    assert crossing_count(cl) == 0
    assert not in_ground_set(cl)


def test_snh_large_parameter_crosses_monotonically():
    cl = shot("snh", 7, 100.0)
    assert crossing_count(cl) >= 1
    assert cl.monotone_to_first_crossing
    assert in_ground_set(cl)


def test_snh_zero_parameter_stays_positive():
    for d in (6, 7, 8):
        cl = shot("snh", d, 0.0)
        assert cl.fate is Fate.DIVERGES_PLUS and crossing_count(cl) == 0


def test_linear_gaussian_decays():
    tr = integrate_shot(ProblemSpec(Family.GP, 3, 1.0, nonlinearity_enabled=False), ShootParam(3.0),
                        SolveConfig(decay_u_tol=1e-4, decay_du_tol=1e-3))
    assert classify(tr).fate is Fate.DECAYS


def test_trivial_trajectory_decays():
    r = np.linspace(0.0, 1.0, 5)
    tr = Trajectory.from_samples(r, np.zeros(5), np.zeros(5))
    cl = classify_trajectory(tr)
    assert cl.fate is Fate.DECAYS and cl.crossings == ()


def test_budget_is_undetermined():
    tr = integrate_shot(ProblemSpec(Family.GP, 4, 1.0), ShootParam(3.0), SolveConfig(max_steps=5))
    assert classify(tr).fate is Fate.UNDETERMINED


def test_divergence_sign_alternates_with_crossings():
    for c in (5.0, 9.0, 13.0):
        cl = shot("gp", 4, c)
        if cl.fate in (Fate.DIVERGES_PLUS, Fate.DIVERGES_MINUS):
            expected = Fate.DIVERGES_PLUS if crossing_count(cl) % 2 == 0 else Fate.DIVERGES_MINUS
            assert cl.fate is expected


def test_excited_predicate():
    one_min = Classification(Fate.DIVERGES_PLUS, (1.0, 2.0), True, 1, (1.5,))
    assert in_excited_set(one_min, 1)
    assert not in_excited_set(one_min, 2)
    wiggle = Classification(Fate.DIVERGES_PLUS, (1.0, 2.0), True, 3, (1.2, 1.5, 1.8))
    assert not in_excited_set(wiggle, 1)
    not_monotone = Classification(Fate.DIVERGES_PLUS, (1.0, 2.0), False, 2, (0.5, 1.5))
    assert not in_excited_set(not_monotone, 1)
    with pytest.raises(InvalidN):
        in_excited_set(one_min, 0)


def test_excited_predicate_on_real_shot():
    # GP d=4 just above the n=1 state: two crossings with one minimum between
    cl = shot("gp", 4, 8.5)
    assert crossing_count(cl) >= 2
    assert in_excited_set(cl, 1)


def test_refined_events_have_kinds():
    tr = integrate_shot(ProblemSpec(Family.SNH, 7, 1.0), ShootParam(100.0))
    kinds = {e.kind for e in tr.events}
    assert {EventKind.U_ZERO, EventKind.U_PRIME_ZERO, EventKind.INFLECTION} <= kinds
