"""Run configuration and on-disk formats (CSV tables, JSON records, SVG plots)."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .integrate import SolveConfig, Trajectory
from .problem import Family, ProblemSpec
from .shoot import ExcitedResult, GroundStateResult, SweepRecord

TRAJECTORY_HEADER = ("r", "u", "du", "h", "dh")
EVENTS_HEADER = ("kind", "r", "u", "du")
RESULT_KEYS = ("family", "d", "b", "p", "c_lo", "c_hi", "c0", "omega", "mass", "truncation_radius", "iterations", "status")
SWEEP_HEADER = ("b", "c0", "omega", "mass", "truncation_radius", "iterations", "status")

_SOLVE_KEYS = tuple(f.name for f in fields(SolveConfig))


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _parse_float(s: str) -> float:
    return float(s) if s != "" else math.nan


@dataclass
class RunConfig:
    family: str = "snh"
    d: int = 7
    b: float = 1.0
    p: float = 3.0
    potential_exponent: float = 2.0
    nonlinearity_enabled: bool = True
    solve: dict = field(default_factory=dict)
    c: float | None = None
    c_tol: float = 1e-10
    n: int = 1
    b_grid: list = field(default_factory=list)
    c_list: list = field(default_factory=lambda: [100.0, 200.0, 400.0, 800.0])
    r_tilde_max: float = 10.0
    out: str = "."
    plot: bool = False

    def problem(self) -> ProblemSpec:
        try:
            return ProblemSpec(Family(self.family), self.d, self.b, self.p, self.potential_exponent,
                               self.nonlinearity_enabled)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def solve_config(self) -> SolveConfig:
        try:
            return SolveConfig(**self.solve)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "RunConfig":
        self.problem()
        self.solve_config()
        if self.c is not None and not (self.c >= 0 and math.isfinite(self.c)):
            raise ConfigError("c must be finite and >= 0")
        if not self.c_tol > 0:
            raise ConfigError("c_tol must be positive")
        return self

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "RunConfig":
        """Build from snake_case keys; SolveConfig fields may sit at top level."""
        known = {f.name for f in fields(cls)}
        kwargs: dict[str, Any] = {}
        solve: dict[str, Any] = dict(data.get("solve", {}))
        for key, value in data.items():
            if key == "solve":
                continue
            if key in _SOLVE_KEYS:
                solve[key] = value
            elif key in known:
                kwargs[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        bad = set(solve) - set(_SOLVE_KEYS)
        if bad:
            raise ConfigError(f"unknown solver keys {sorted(bad)}")
        return cls(solve=solve, **kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_mapping(data)


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    snh = traj.h is not None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        for r, row in zip(traj.r, traj.y):
            vals = [fmt(v) for v in row]
            w.writerow([fmt(r)] + vals[:2] + (vals[2:4] if snh else ["", ""]))


def read_trajectory_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TRAJECTORY_HEADER:
        raise ValueError(f"unexpected trajectory header {rows[0]}")
    cols = list(zip(*rows[1:])) if len(rows) > 1 else [()] * 5
    return {k: np.array([_parse_float(v) for v in col]) for k, col in zip(TRAJECTORY_HEADER, cols)}


def write_events_csv(traj: Trajectory, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENTS_HEADER)
        for e in traj.events:
            w.writerow([e.kind.value, fmt(e.r), fmt(e.state.u), fmt(e.state.du)])


def result_record(res: GroundStateResult) -> dict[str, Any]:
    p = res.problem
    rec = {
        "family": p.family.value,
        "d": p.d,
        "b": p.b,
        "p": p.p,
        "c_lo": res.c_lo,
        "c_hi": res.c_hi,
        "c0": res.c0,
        "omega": res.omega,
        "mass": res.mass,
        "truncation_radius": res.truncation_radius,
        "iterations": res.iterations,
        "status": res.status,
    }
    if isinstance(res, ExcitedResult):
        rec["n"] = res.n
        rec["crossing_radii"] = list(res.crossing_radii)
    return rec


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return float(v)


def write_record_json(record: dict[str, Any], path: str | Path) -> None:
    # json's float repr is the shortest round-tripping form, i.e. exact
    Path(path).write_text(json.dumps({k: _json_value(v) for k, v in record.items()}, indent=2) + "\n")


def read_record_json(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())


def write_sweep_csv(records: Iterable[SweepRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for rec in records:
            w.writerow([fmt(rec.b), fmt(rec.c0), fmt(rec.omega), fmt(rec.mass), fmt(rec.truncation_radius),
                        str(rec.iterations), rec.status])


def read_sweep_csv(path: str | Path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != SWEEP_HEADER:
        raise ValueError(f"unexpected sweep header {rows[0]}")
    out = []
    for row in rows[1:]:
        b, c0, om, m, R, it, st = row
        out.append(SweepRecord(float(b), float(c0), float(om), float(m), float(R), int(it), st))
    return out


def write_table_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_svg(x, y, path: str | Path, xlabel: str = "r", ylabel: str = "u", title: str = "",
              width: int = 640, height: int = 400) -> None:
    """Single-series line chart with axis labels and min/max ticks."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    pad = 50
    if len(x) == 0:
        x, y = np.array([0.0, 1.0]), np.array([0.0, 0.0])
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    sx = (width - 2 * pad) / (x1 - x0)
    sy = (height - 2 * pad) / (y1 - y0)
    pts = " ".join(f"{pad + (a - x0) * sx:.2f},{height - pad - (b - y0) * sy:.2f}" for a, b in zip(x, y))
    svg = f"""<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">
<rect width="100%" height="100%" fill="white"/>
<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>
<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>
<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>
<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>
<text x="15" y="{height / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {height / 2})">{ylabel}</text>
<text x="{pad}" y="{height - pad + 15}" text-anchor="middle" font-size="10">{x0:.4g}</text>
<text x="{width - pad}" y="{height - pad + 15}" text-anchor="middle" font-size="10">{x1:.4g}</text>
<text x="{pad - 5}" y="{height - pad}" text-anchor="end" font-size="10">{y0:.4g}</text>
<text x="{pad - 5}" y="{pad + 4}" text-anchor="end" font-size="10">{y1:.4g}</text>
<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>
</svg>
"""
    Path(path).write_text(svg)


def config_as_dict(cfg: RunConfig) -> dict[str, Any]:
    return asdict(cfg)
