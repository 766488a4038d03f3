"""Command-line front end.

Exit codes: 0 success, 1 numerical failure (no bracket, tolerance not met,
a diagnostic that does not pass), 2 configuration or usage error.
Settings resolve as command-line flag > ``--config`` file > built-in default.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import diagnose, records
from ._dopri import NonFiniteState
from .classify import classify
from .integrate import SolveConfig, integrate_shot
from .problem import Family, ProblemSpec, ShootParam
from .records import ConfigError, RunConfig
from .shoot import BracketNotFound, NotDecayed, ToleranceNotReached, find_excited, find_ground, sweep_omega_of_b

log = logging.getLogger("nlse_shoot")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2
CHECKS = ("pohozaev", "identities", "assumptions", "rescaling", "particle", "linear-oracle")
NUMERIC_ERRORS = (BracketNotFound, ToleranceNotReached, NotDecayed, NonFiniteState, diagnose.DomainTooShort)


class UsageError(Exception):
    pass


def int_range(text: str) -> list[int]:
    """``"5"`` -> [5], ``"3..6"`` -> [3, 4, 5, 6], ``"3,5"`` -> [3, 5]."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            vals = list(range(int(lo), int(hi) + 1))
        else:
            vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer or range: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError(f"empty range: {text!r}")
    return vals


def float_list(text: str) -> list[float]:
    """Comma list ``"0.5,1,2"`` or linspace ``"start:stop:count"``."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problem")
    g.add_argument("--config", help="JSON file with RunConfig keys")
    g.add_argument("--family", choices=[f.value for f in Family])
    g.add_argument("--d", type=int_range, help="dimension (ranges like 3..6 only for linear-oracle)")
    g.add_argument("--b", type=float, help="central value u(0)")
    g.add_argument("--p", type=float, help="power-family exponent")
    g.add_argument("--potential-exponent", type=float)
    g.add_argument("--linear", dest="nonlinearity_enabled", action="store_const", const=False,
                   help="drop the nonlinear coupling (harmonic oscillator)")
    s = p.add_argument_group("solver")
    for f in fields(SolveConfig):
        typ = int if f.type in ("int", int) else float
        s.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=typ)
    o = p.add_argument_group("output")
    o.add_argument("--out", help="output directory (default: current)")
    o.add_argument("--plot", action="store_const", const=True, help="also write an SVG plot")
    o.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlse-shoot", description="Radial NLSE ground and excited states by shooting.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shoot", help="integrate one shot and classify it")
    _add_common(p)
    p.add_argument("--c", type=float, help="shooting parameter")

    p = sub.add_parser("ground", help="bisect for the ground state")
    _add_common(p)
    p.add_argument("--c-tol", type=float)

    p = sub.add_parser("excited", help="bisect for the state with n crossings")
    _add_common(p)
    p.add_argument("--n", type=int_range)
    p.add_argument("--c-tol", type=float)

    p = sub.add_parser("sweep", help="ground states over a grid of central values")
    _add_common(p)
    p.add_argument("--b-grid", type=float_list, help="'0.5,1,2' or 'start:stop:count'")
    p.add_argument("--c-tol", type=float)

    p = sub.add_parser("check", help="run a diagnostic")
    p.add_argument("name", choices=CHECKS)
    _add_common(p)
    p.add_argument("--c", type=float)
    p.add_argument("--n", type=int_range)
    p.add_argument("--c-list", type=float_list)
    p.add_argument("--r-tilde-max", type=float)
    p.add_argument("--c-tol", type=float)
    return parser


def resolve(args: argparse.Namespace) -> tuple[RunConfig, dict[str, Any]]:
    """Merge file and flags into a RunConfig; range-valued flags are returned separately."""
    base = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    data = records.config_as_dict(base)
    solve = dict(data.pop("solve"))
    extra: dict[str, Any] = {}
    solve_keys = {f.name for f in fields(SolveConfig)}
    for key, value in vars(args).items():
        if value is None or key in ("config", "command", "name", "verbose"):
            continue
        if key in solve_keys:
            solve[key] = value
        elif key in ("d", "n"):
            extra[key] = value
            if len(value) == 1:
                data[key] = value[0]
        elif key in data:
            data[key] = value
    for key in ("d", "n"):
        extra.setdefault(key, [data[key]])
    cfg = RunConfig(solve=solve, **data)
    return cfg.validate(), extra


def _single(extra, key):
    if len(extra[key]) != 1:
        raise UsageError(f"--{key} takes a single value for this command")
    return extra[key][0]


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_shoot(cfg: RunConfig, extra) -> int:
    if cfg.c is None:
        raise UsageError("shoot needs --c")
    problem, config = cfg.problem(), cfg.solve_config()
    traj = integrate_shot(problem, ShootParam(cfg.c), config)
    cl = classify(traj, config)
    out = _outdir(cfg)
    records.write_trajectory_csv(traj, out / "trajectory.csv")
    records.write_events_csv(traj, out / "events.csv")
    if cfg.plot:
        records.write_svg(traj.r, traj.u, out / "trajectory.svg", title=f"{problem.family.value} d={problem.d} c={cfg.c:g}")
    crossings = ", ".join(f"{r:.10g}" for r in cl.crossings) or "none"
    print(f"fate: {cl.fate.value}")
    print(f"termination: {traj.termination.value} at r = {traj.r_end:.10g}")
    print(f"crossings: {len(cl.crossings)} ({crossings})")
    print(f"monotone to first crossing: {cl.monotone_to_first_crossing}")
    return EXIT_OK


def _report_result(res, out: Path, cfg: RunConfig, stem: str) -> None:
    records.write_record_json(records.result_record(res), out / f"{stem}.json")
    records.write_trajectory_csv(res.profile, out / f"{stem}_profile.csv")
    if cfg.plot:
        records.write_svg(res.profile.r, res.profile.u, out / f"{stem}_profile.svg", title=f"{stem} profile")
    print(f"c0 = {res.c0:.17g}  (bracket [{res.c_lo:.17g}, {res.c_hi:.17g}])")
    print(f"omega = {res.omega:.17g}")
    print(f"mass = {res.mass:.17g}")
    print(f"truncation radius = {res.truncation_radius:.10g}, iterations = {res.iterations}, status = {res.status}")


def cmd_ground(cfg: RunConfig, extra) -> int:
    res = find_ground(cfg.problem(), cfg.solve_config(), cfg.c_tol)
    _report_result(res, _outdir(cfg), cfg, "ground")
    return EXIT_OK


def cmd_excited(cfg: RunConfig, extra) -> int:
    n = _single(extra, "n")
    if n < 1:
        raise UsageError("excited needs --n >= 1 (use 'ground' for n = 0)")
    res = find_excited(cfg.problem(), n, cfg.solve_config(), cfg.c_tol)
    _report_result(res, _outdir(cfg), cfg, f"excited_n{n}")
    print("crossing radii: " + ", ".join(f"{r:.12g}" for r in res.crossing_radii))
    print(f"structure check: {'ok' if res.structure_ok else 'failed'}")
    return EXIT_OK if res.status == "ok" else EXIT_NUMERIC


def cmd_sweep(cfg: RunConfig, extra) -> int:
    if not cfg.b_grid:
        raise UsageError("sweep needs a non-empty --b-grid")
    try:
        recs = sweep_omega_of_b(cfg.problem(), cfg.b_grid, cfg.solve_config(), cfg.c_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = _outdir(cfg)
    records.write_sweep_csv(recs, out / "sweep.csv")
    if cfg.plot:
        ok = [r for r in recs if r.status == "ok"]
        records.write_svg([r.b for r in ok], [r.omega for r in ok], out / "sweep.svg", xlabel="b", ylabel="omega",
                          title="omega(b)")
    for r in recs:
        print(f"b = {r.b:<10.6g} c0 = {r.c0:<22.17g} omega = {r.omega:<22.17g} {r.status}")
    failed = sum(r.status != "ok" for r in recs)
    if failed:
        print(f"{failed} of {len(recs)} points failed")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def _radii(lo: float, hi: float, k: int = 20) -> list[float]:
    return list(np.linspace(lo, hi, k + 1)[1:])


def _check_pohozaev(cfg, extra, out):
    problem = cfg.problem()
    if problem.family is not Family.SNH:
        raise UsageError("pohozaev needs --family snh")
    traj = integrate_shot(problem, ShootParam(0.0), cfg.solve_config())
    rows, ok = [], True
    for R in _radii(float(traj.r[0]) * 10, traj.r_end):
        rep = diagnose.pohozaev_terms(traj, R)
        vals = rep.values()
        ok &= min(vals) >= -1e-9
        rows.append([R, *vals, rep.total])
    records.write_table_csv(("R", *diagnose.POHOZAEV_NAMES, "total"), rows, out / "check_pohozaev.csv")
    print(f"{len(rows)} radii, min term {min(min(r[1:6]) for r in rows):.3e}")
    return ok


def _check_identities(cfg, extra, out):
    problem = cfg.problem()
    c = 0.0 if cfg.c is None else cfg.c
    traj = integrate_shot(problem, ShootParam(c), cfg.solve_config())
    hres, ures = diagnose.check_h_integral(traj), diagnose.check_u_integral(traj)
    records.write_table_csv(("r", "h_residual", "u_residual"), zip(traj.r, hres.residuals, ures.residuals),
                            out / "check_identities.csv")
    print(f"max relative residual: h' {hres.max:.3e}, u' {ures.max:.3e}")
    return max(hres.max, ures.max) < 1e-7


def _check_assumptions(cfg, extra, out):
    res = find_ground(cfg.problem(), cfg.solve_config(), cfg.c_tol)
    rep = diagnose.check_assumptions(res.profile)
    rec = {
        "c": rep.c,
        "u2": rep.u2,
        "concavity_checked": rep.concavity_checked,
        "concave_at_origin": rep.concave_at_origin,
        "snh_datum": rep.snh_datum,
        "stationary_inflections": rep.stationary_inflections,
        "ordinary_inflections": rep.ordinary_inflections,
        "ok": rep.ok,
    }
    records.write_record_json(rec, out / "check_assumptions.json")
    print(f"c0 = {res.c0:.17g}: concavity at origin {'ok' if rep.concave_at_origin else 'violated'}, "
          f"{len(rep.stationary_inflections)} stationary inflections")
    return rep.ok


def _check_rescaling(cfg, extra, out):
    rows = diagnose.rescaling_convergence(cfg.problem(), cfg.b, cfg.c_list, cfg.r_tilde_max)
    table = []
    for prev, row in zip([None] + rows[:-1], rows):
        ratio = prev.sup_error / row.sup_error if prev is not None else math.nan
        table.append([row.c, row.sup_error, ratio, row.first_crossing, row.limit_first_crossing])
        print(f"c = {row.c:<8g} sup error {row.sup_error:.4e}  ratio {ratio:.3f}  first zero {row.first_crossing:.8f}")
    records.write_table_csv(("c", "sup_error", "ratio", "first_crossing", "limit_first_crossing"), table,
                            out / "check_rescaling.csv")
    ratios = [t[2] for t in table[1:]]
    last = rows[-1]
    return all(2.5 <= q <= 5.5 for q in ratios) and abs(last.first_crossing / last.limit_first_crossing - 1) < 0.01


def _check_particle(cfg, extra, out):
    if cfg.c is None:
        raise UsageError("particle needs --c")
    traj = integrate_shot(cfg.problem(), ShootParam(cfg.c), cfg.solve_config())
    view = diagnose.gp_particle_view(traj)
    records.write_table_csv(("t", "w", "dw", "potential", "energy", "residual"),
                            zip(view.t, view.w, view.dw, view.potential, view.energy, view.residual),
                            out / "check_particle.csv")
    print(f"max relative residual {view.max_residual:.3e}; frozen-well energy increases: {view.frozen_energy_increases}")
    return view.max_residual < 1e-6


def _check_linear_oracle(cfg, extra, out):
    config = cfg.solve_config()
    rows, ok = [], True
    for d in extra["d"]:
        problem = ProblemSpec(Family(cfg.family), d, cfg.b, cfg.p, cfg.potential_exponent, nonlinearity_enabled=False)
        for n in extra["n"]:
            res = find_ground(problem, config, cfg.c_tol) if n == 0 else find_excited(problem, n, config, cfg.c_tol)
            exact = d + 4 * n
            err = abs(res.omega - exact)
            ok &= err < 1e-6
            rows.append([d, n, res.omega, exact, err])
            print(f"d = {d:<3d} n = {n}  omega = {res.omega:.12f}  exact = {exact:<3d} |err| = {err:.2e}")
    records.write_table_csv(("d", "n", "omega", "exact", "abs_error"), rows, out / "check_linear_oracle.csv")
    return ok


_CHECK_FUNCS = {
    "pohozaev": _check_pohozaev,
    "identities": _check_identities,
    "assumptions": _check_assumptions,
    "rescaling": _check_rescaling,
    "particle": _check_particle,
    "linear-oracle": _check_linear_oracle,
}


def cmd_check(cfg: RunConfig, extra, name: str) -> int:
    if name != "linear-oracle":
        _single(extra, "d")
    try:
        ok = _CHECK_FUNCS[name](cfg, extra, _outdir(cfg))
    except (diagnose.WrongFamily, diagnose.WrongParam) as exc:
        raise UsageError(str(exc)) from exc
    print(f"{name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_NUMERIC


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg, extra = resolve(args)
        if args.command == "check":
            return cmd_check(cfg, extra, args.name)
        _single(extra, "d")
        return {"shoot": cmd_shoot, "ground": cmd_ground, "excited": cmd_excited, "sweep": cmd_sweep}[args.command](
            cfg, extra)
    except (ConfigError, UsageError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
