from __future__ import annotations

import csv
import json

import pytest

from nlse_shoot import records
from nlse_shoot.cli import build_parser, float_list, int_range, main, resolve


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_ranges():
    assert int_range("3..6") == [3, 4, 5, 6]
    assert int_range("4") == [4]
    assert float_list("0.5:2:4") == [0.5, 1.0, 1.5, 2.0]
    assert float_list("1,2") == [1.0, 2.0]


def test_shoot_gp_zero_diverges(tmp_path, capsys):
    assert run(tmp_path, "shoot", "--family", "gp", "--d", "4", "--b", "1", "--c", "0") == 0
    assert "DivergesPlus" in capsys.readouterr().out
    assert (tmp_path / "trajectory.csv").read_text().startswith("r,u,du,h,dh\n")
    assert (tmp_path / "events.csv").exists()


def test_shoot_snh_large_c_reports_crossings(tmp_path, capsys):
    assert run(tmp_path, "shoot", "--family", "snh", "--d", "7", "--b", "1", "--c", "100") == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("crossings:"))
    assert int(line.split()[1]) >= 1


def test_shoot_without_c_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "shoot", "--family", "gp", "--d", "4") == 2
    assert "usage" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["shoot", "--family", "klein-gordon"])
    assert exc.value.code == 2


def test_ground_snh_writes_record_with_omega(tmp_path):
    assert run(tmp_path, "ground", "--family", "snh", "--d", "7", "--b", "1") == 0
    rec = json.loads((tmp_path / "ground.json").read_text())
    assert tuple(rec) == records.RESULT_KEYS
    assert rec["status"] == "ok" and 6.5 < rec["omega"] < 7.5
    assert (tmp_path / "ground_profile.csv").exists()


def test_excited_writes_crossings(tmp_path):
    assert run(tmp_path, "excited", "--family", "gp", "--d", "3", "--linear", "--n", "1", "--plot") == 0
    rec = json.loads((tmp_path / "excited_n1.json").read_text())
    assert rec["n"] == 1 and len(rec["crossing_radii"]) == 1
    assert (tmp_path / "excited_n1_profile.svg").exists()


def test_sweep_empty_grid_exit_2(tmp_path):
    assert run(tmp_path, "sweep", "--family", "gp", "--d", "4", "--b-grid", "") == 2
    assert run(tmp_path, "sweep", "--family", "gp", "--d", "4") == 2


def test_sweep_writes_table_and_plot(tmp_path):
    assert run(tmp_path, "sweep", "--family", "gp", "--d", "3", "--linear", "--b-grid", "0.5,1", "--plot") == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert [float(r["b"]) for r in rows] == [0.5, 1.0]
    assert all(abs(float(r["omega"]) - 3) < 1e-6 for r in rows)
    assert (tmp_path / "sweep.svg").exists()


def test_check_linear_oracle_table(tmp_path):
    assert run(tmp_path, "check", "linear-oracle", "--d", "3..6", "--n", "0..2") == 0
    rows = list(csv.DictReader(open(tmp_path / "check_linear_oracle.csv")))
    assert len(rows) == 12
    assert all(float(r["abs_error"]) < 1e-6 for r in rows)


def test_check_wrong_family_is_usage_error(tmp_path):
    assert run(tmp_path, "check", "particle", "--family", "snh", "--d", "7", "--c", "3") == 2
    assert run(tmp_path, "check", "pohozaev", "--family", "gp", "--d", "4") == 2


def test_check_pohozaev_and_identities(tmp_path):
    assert run(tmp_path, "check", "pohozaev", "--family", "snh", "--d", "6") == 0
    assert run(tmp_path, "check", "identities", "--family", "snh", "--d", "7", "--c", "5") == 0


def test_numerical_failure_exit_1(tmp_path):
    assert run(tmp_path, "ground", "--family", "snh", "--d", "7", "--max-doublings", "1") == 1


def test_precedence_cli_over_file_over_default(tmp_path):
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps({"family": "gp", "d": 5, "b": 2.0, "rel_tol": 1e-9}))
    args = build_parser().parse_args(["ground", "--config", str(cfg_path), "--d", "6"])
    cfg, _ = resolve(args)
    assert cfg.family == "gp"  # file
    assert cfg.d == 6  # flag beats file
    assert cfg.b == 2.0  # file beats default
    assert cfg.solve["rel_tol"] == 1e-9
    assert cfg.c_tol == 1e-10  # default


def test_unknown_config_key_exit_2(tmp_path):
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps({"family": "gp", "frequency": 3}))
    assert run(tmp_path, "ground", "--config", str(cfg_path)) == 2


def test_range_rejected_outside_linear_oracle(tmp_path):
    assert run(tmp_path, "ground", "--family", "gp", "--d", "4..5") == 2
