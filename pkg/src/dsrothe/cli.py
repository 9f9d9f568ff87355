"""Command line: ``run``, ``study`` and ``validate``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .diagnostics import apriori_suite, run_validation
from .errors import ConfigError, PreconditionError, ReferenceFailure, SolverError
from .interpolants import RotheInterpolants
from .output import line_plot_svg, write_bounds_csv, write_csv, write_trajectory_csv
from .stepper import run_scheme
from .study import ERROR_KEYS, run_study
from .timegrid import TimeGrid

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_REFERENCE, EXIT_VALIDATION = 0, 2, 3, 4, 5


def _err(msg):
    print(msg, file=sys.stderr)


def _prepare(args):
    cfg = load_config(args.config)
    if args.tol is not None:
        if not args.tol > 0:
            raise ConfigError("--tol must be positive", "/solver/tol_residual")
        cfg.solver = replace(cfg.solver, tol_residual=args.tol)
    if args.plots:
        cfg.emit_plots = True
    out = Path(args.out if args.out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def cmd_run(args) -> int:
    cfg, out = _prepare(args)
    N = cfg.ladder[-1]
    grid = TimeGrid(cfg.horizon, N)
    traj = run_scheme(cfg.problem, grid, cfg.solver, cfg.cap_C, seed=cfg.seed)
    interp = RotheInterpolants(traj)
    report = apriori_suite(traj, interp)
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_bounds_csv([(N, report)], out / "bounds.csv")
    if cfg.emit_plots:
        s = traj.setting
        t = list(grid.nodes)
        line_plot_svg([("|w^n|_H", t, [s.norm_h(v) for v in traj.w])], out / "w_norm.svg",
                      "velocity", "t", "|w^n|_H")
        line_plot_svg([("||u^n||_V", t, [s.norm_v(v) for v in traj.u])], out / "u_norm.svg",
                      "displacement", "t", "||u^n||_V")
        line_plot_svg([("residual", t[1:], list(traj.residuals))], out / "residuals.svg",
                      "step residuals", "t", "residual", logy=True)
    print(f"run: {traj.label} N={N} tau={traj.tau:.6g} max residual={max(traj.residuals):.3e}")
    for note in traj.notes:
        print(f"  {note}")
    print(report.format())
    print(f"wrote {out / 'trajectory.csv'}, {out / 'bounds.csv'}")
    return EXIT_OK


def cmd_study(args) -> int:
    cfg, out = _prepare(args)
    rep = run_study(cfg.problem, cfg.horizon, cfg.ladder, cfg.solver, cfg.case, cfg.n_ref, cfg.cap_C, cfg.seed)
    write_csv(out / "study.csv", rep.header(), rep.rows())
    if cfg.emit_plots:
        taus = rep.column("tau")
        line_plot_svg([(k, taus, rep.column(k)) for k in ERROR_KEYS], out / "study.svg",
                      f"errors vs tau ({rep.reference})", "tau", "error", logx=True, logy=True)
    print(f"study: {cfg.problem.label} against {rep.reference}")
    print("  N      tau         " + "  ".join(f"{k:>14s}" for k in ERROR_KEYS))
    for lev in rep.levels:
        print(f"  {lev['N']:<6d} {lev['tau']:<11.4g} " + "  ".join(f"{lev[k]:14.6e}" for k in ERROR_KEYS))
    print("  EOC")
    for i in range(len(rep.levels) - 1):
        cells = []
        for k in ERROR_KEYS:
            r = rep.eoc[k][i]
            cells.append(f"{r:>14s}" if isinstance(r, str) else f"{r:14.4f}")
        print(f"  {rep.levels[i]['N']}->{rep.levels[i + 1]['N']:<6d}" + "  ".join(cells))
    if rep.decay:
        print("  first increment |w^1 - w^0|_H")
        for N, tau, v in rep.decay:
            print(f"  N={N:<6d} tau={tau:<11.4g} {v:.6e}")
    print(f"wrote {out / 'study.csv'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_validation(args.seed, args.sweep)
    ok = True
    for r in results:
        print(r.line())
        ok &= r.passed
    if not ok:
        failing = ", ".join(r.name for r in results if not r.passed)
        _err(f"validation failed: {failing}")
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dsrothe", description="Double-step Rothe scheme experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("run", cmd_run, "one trajectory at the largest ladder N"),
                            ("study", cmd_study, "tau-refinement study over the ladder")):
        q = sub.add_parser(name, help=help_)
        q.add_argument("config", help="JSON configuration file")
        q.add_argument("--out", default=None, help="output directory (overrides config 'out')")
        q.add_argument("--plots", action="store_true", help="emit SVG plots")
        q.add_argument("--tol", type=float, default=None, help="inclusion residual tolerance")
        q.set_defaults(func=fn)
    q = sub.add_parser("validate", help="identity / inequality / oracle sweeps")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--sweep", type=int, default=1000, help="random instances per sweep")
    q.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error at {exc.path or '/'}: {exc}")
        return EXIT_CONFIG
    except PreconditionError as exc:
        _err(f"config error at /problem: {exc}")
        return EXIT_CONFIG
    except ReferenceFailure as exc:
        _err(f"reference failure: {exc}")
        return EXIT_REFERENCE
    except SolverError as exc:
        _err(f"solver failure at step {exc.step}: {exc} (best residual {exc.best_residual:.3e})")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
