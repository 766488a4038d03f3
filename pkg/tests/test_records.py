from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlse_shoot import records
from nlse_shoot.integrate import integrate_shot
from nlse_shoot.problem import Family, ProblemSpec, ShootParam
from nlse_shoot.records import ConfigError, RunConfig
from nlse_shoot.shoot import SweepRecord


@given(st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=200)
def test_fmt_round_trips_every_double(x):
    assert float(records.fmt(x)) == x


def test_golden_headers(tmp_path):
    tr = integrate_shot(ProblemSpec(Family.GP, 4, 1.0), ShootParam(0.0))
    records.write_trajectory_csv(tr, tmp_path / "t.csv")
    records.write_sweep_csv([SweepRecord(1.0, 2.0, 2.0, 0.5, 5.0, 30, "ok")], tmp_path / "s.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "r,u,du,h,dh"
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "b,c0,omega,mass,truncation_radius,iterations,status"
    assert records.RESULT_KEYS == ("family", "d", "b", "p", "c_lo", "c_hi", "c0", "omega", "mass",
                                   "truncation_radius", "iterations", "status")


def test_trajectory_round_trip(tmp_path):
    for family in (Family.SNH, Family.GP):
        tr = integrate_shot(ProblemSpec(family, 7, 1.0), ShootParam(10.0))
        path = tmp_path / f"{family.value}.csv"
        records.write_trajectory_csv(tr, path)
        back = records.read_trajectory_csv(path)
        assert np.array_equal(back["r"], tr.r)
        assert np.array_equal(back["u"], tr.u) and np.array_equal(back["du"], tr.du)
        if family is Family.SNH:
            assert np.array_equal(back["h"], tr.h) and np.array_equal(back["dh"], tr.dh)
        else:
            assert np.all(np.isnan(back["h"]))
            assert ",," in path.read_text().splitlines()[1] + ","


def test_result_record_round_trip(tmp_path, gp4):
    rec = records.result_record(gp4)
    assert tuple(rec) == records.RESULT_KEYS
    records.write_record_json(rec, tmp_path / "r.json")
    assert records.read_record_json(tmp_path / "r.json") == rec


def test_sweep_round_trip(tmp_path):
    recs = [
        SweepRecord(0.1, 1 / 3, math.pi, 1e-300, 5.000000000000001, 41, "ok"),
        SweepRecord(0.2, math.nan, math.nan, math.nan, math.nan, 0, "bracket_failed"),
    ]
    records.write_sweep_csv(recs, tmp_path / "s.csv")
    back = records.read_sweep_csv(tmp_path / "s.csv")
    assert back[0] == recs[0]
    assert back[1].status == "bracket_failed" and math.isnan(back[1].c0)


def test_run_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"family": "gp", "colour": "red"})
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"solve": {"rel_tolerance": 1e-8}})
    path = tmp_path / "c.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        RunConfig.load(path)


def test_run_config_validation():
    assert RunConfig.from_mapping({"rel_tol": 1e-8}).solve_config().rel_tol == 1e-8
    with pytest.raises(ConfigError):
        RunConfig(family="nope").validate()
    with pytest.raises(ConfigError):
        RunConfig(d=0).validate()
    with pytest.raises(ConfigError):
        RunConfig(solve={"rel_tol": -1.0}).validate()
    with pytest.raises(ConfigError):
        RunConfig(c=-2.0).validate()


def test_svg_is_well_formed(tmp_path):
    import xml.etree.ElementTree as ET

    records.write_svg([0, 1, 2], [1, 0.5, 0.1], tmp_path / "p.svg", title="u")
    root = ET.parse(tmp_path / "p.svg").getroot()
    assert root.tag.endswith("svg")
    assert any(el.tag.endswith("polyline") for el in root)


def test_config_file_is_plain_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"family": "gp", "d": 5, "solve": {"r_max": 30.0}, "rel_tol": 1e-9}))
    cfg = RunConfig.load(path)
    assert cfg.family == "gp" and cfg.d == 5
    assert cfg.solve == {"r_max": 30.0, "rel_tol": 1e-9}
