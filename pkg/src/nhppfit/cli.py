"""Command-line interface: simulate, bin, check, fit, sweep.

Exit status: 0 on success, 1 on usage or input errors, 2 when no feasible
partition was found within the evaluation budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from datetime import date
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .config import ConfigError, RunConfig, read_config_file, resolve
from .empirical import EmpiricalRate, build_empirical
from .ingest import ArrivalDataset, IngestError, load_arrivals
from .partition import PartitionGrid, PartitionProblem, from_cuts
from .report import ReportBundle, fine_csv, render, steps_csv, table_csv, to_json, to_text
from .solver import SolverConfig, SolverRun, solve_restarts
from .stattests import TestConfig
from .synth import OverdispersionSpec, TrueRate, generate, write_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _add_data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", help="arrivals CSV with a 'timestamp' column")
    p.add_argument("--weekday", help="weekday to select (mon..sun), default tue")
    p.add_argument("--cells", type=int, help="fine grid cells per day, default 96")


def _add_model_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="significance level, default 0.05")
    p.add_argument("--grid", type=int, help="boundary grid units per day (G), default 24")
    p.add_argument("--max-intervals", type=int, dest="max_intervals", help="maximum intervals (B), default 24")
    p.add_argument("--ell-hours", type=float, dest="ell_hours", help="minimum interval length in hours, default 1")
    p.add_argument("--format", choices=("json", "csv", "text"), help="stdout format, default text")
    p.add_argument("--output-dir", dest="output_dir", help="where report files go (default: beside the input)")


def _add_solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, help="maximum function evaluations, default 5000")
    p.add_argument("--seed", type=int, help="solver seed, default 0")
    p.add_argument("--restarts", type=int, help="independent runs, best kept, default 1")
    p.add_argument("--penalty-eps", type=float, dest="penalty_eps", help="initial penalty parameter, default 1")
    p.add_argument("--penalty-shrink", type=float, dest="penalty_shrink", help="penalty shrink factor, default 0.1")
    p.add_argument("--memory", type=int, help="nonmonotone memory length, default 4")
    p.add_argument("--initial-step", type=int, dest="initial_step", help="initial integer step, default 2")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file with defaults")

    parser = _Parser(prog="nhppfit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="write synthetic NHPP arrivals as CSV")
    p.add_argument("--segments", required=True, help='piecewise rate, e.g. "0-12:2,12-24:6"')
    p.add_argument("--weeks", type=int, help="number of weeks, default 13")
    p.add_argument("--seed", type=int, help="random seed, default 0")
    p.add_argument("--weekday", help="weekday of the generated dates, default tue")
    p.add_argument("--week-scales", dest="week_scales", help="per-week rate factors, cycled, e.g. 1,3")
    p.add_argument("--start-date", dest="start_date", default="2018-01-01", help="first date considered")
    p.add_argument("--out", "-o", required=True, help="output CSV path")

    p = sub.add_parser("bin", parents=[common], help="empirical fine-grid rate as CSV")
    _add_data_options(p)
    p.add_argument("--weeks", type=int, help="number of weeks, default 13")
    p.add_argument("--out", "-o", help="output CSV path (default stdout)")

    p = sub.add_parser("check", parents=[common], help="run both tests on a given partition")
    _add_data_options(p)
    _add_model_options(p)
    p.add_argument("--weeks", type=int, help="number of weeks, default 13")
    p.add_argument("--boundaries", required=True, help='interval boundaries in hours, e.g. "0,2,5,24"')

    p = sub.add_parser("fit", parents=[common], help="optimal partition for one setting")
    _add_data_options(p)
    _add_model_options(p)
    _add_solver_options(p)
    p.add_argument("--weeks", type=int, help="number of weeks, default 13")
    p.add_argument("--weight", type=float, help="smoothness weight w, default 1")

    p = sub.add_parser("sweep", parents=[common], help="fit over lists of weights and/or weeks")
    _add_data_options(p)
    _add_model_options(p)
    _add_solver_options(p)
    p.add_argument("--weights", help="comma-separated weights, e.g. 0,0.1,1,10,1000")
    p.add_argument("--weeks", dest="weeks_list", help="comma-separated week counts, e.g. 5,9,13")
    p.add_argument("--weight", type=float, help="weight used when --weights is absent")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    return resolve(vars(args), file_values)


def _load(cfg: RunConfig, args: argparse.Namespace, weeks: int) -> tuple[ArrivalDataset, EmpiricalRate]:
    if not args.input:
        raise UsageError("--input is required")
    ds = load_arrivals(args.input, cfg.weekday, weeks)
    return ds, build_empirical(ds, cfg.cells)


def _problem(cfg: RunConfig, ds: ArrivalDataset, er: EmpiricalRate, w: float) -> PartitionProblem:
    grid = PartitionGrid.from_hours(cfg.grid, cfg.max_intervals, cfg.ell_hours)
    return PartitionProblem(ds, er, w, TestConfig(cfg.alpha), grid)


def _solver_config(cfg: RunConfig) -> SolverConfig:
    return SolverConfig(
        max_evals=cfg.budget,
        penalty_eps=cfg.penalty_eps,
        penalty_shrink=cfg.penalty_shrink,
        nonmonotone_memory=cfg.memory,
        initial_step=cfg.initial_step,
        seed=cfg.seed,
    )


def _meta(cfg: RunConfig, weeks: int, w: float, run: SolverRun | None = None) -> dict[str, Any]:
    meta: dict[str, Any] = {
        "weekday": cfg.weekday,
        "m": weeks,
        "alpha": cfg.alpha,
        "ell_hours": cfg.ell_hours,
        "w": w,
        "grid": cfg.grid,
        "max_intervals": cfg.max_intervals,
        "cells": cfg.cells,
    }
    if run is not None:
        meta.update(
            budget=cfg.budget,
            seed=cfg.seed,
            restarts=cfg.restarts,
            evals_used=run.evals_used,
            converged=run.converged,
        )
    return meta


def _emit(bundle: ReportBundle, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(to_json(bundle))
    elif fmt == "csv":
        sys.stdout.write(table_csv(bundle))
    else:
        sys.stdout.write(to_text(bundle))


def _stem(cfg: RunConfig, args: argparse.Namespace, tag: str = "") -> Path:
    src = Path(args.input)
    out_dir = Path(cfg.output_dir) if cfg.output_dir else src.parent
    return out_dir / (src.stem + tag)


def write_bundle(stem: Path, bundle: ReportBundle, run: SolverRun | None = None) -> list[Path]:
    paths = [
        stem.with_name(stem.name + ".report.json"),
        stem.with_name(stem.name + ".steps.csv"),
        stem.with_name(stem.name + ".fine.csv"),
    ]
    atomic_write(paths[0], to_json(bundle))
    atomic_write(paths[1], steps_csv(bundle))
    atomic_write(paths[2], fine_csv(bundle))
    if run is not None:
        paths.append(stem.with_name(stem.name + ".run.json"))
        atomic_write(paths[-1], json.dumps(run.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return paths


def _fmt_num(v: float) -> str:
    return f"{v:g}"


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    rate = TrueRate.parse(args.segments)
    od = None
    if args.week_scales:
        factors = [float(v) for v in args.week_scales.split(",")]
        od = OverdispersionSpec.alternating(cfg.weeks, factors)
    ds = generate(rate, cfg.weeks, od, seed=cfg.seed, weekday=cfg.weekday)
    start = date.fromisoformat(args.start_date)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=f".{out.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write_csv(ds, tmp, start)
        os.replace(tmp, out)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    print(f"wrote {ds.total} arrivals over {ds.m} {cfg.weekday} dates to {out}")
    return EXIT_OK


def cmd_bin(args: argparse.Namespace) -> int:
    cfg = _config(args)
    ds, er = _load(cfg, args, cfg.weeks)
    lines = ["cell_start_hour,rate_per_hour"]
    lines += [f"{s!r},{r!r}" for s, r in zip(er.cell_starts().tolist(), er.rates.tolist())]
    text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    cfg = _config(args)
    ds, er = _load(cfg, args, cfg.weeks)
    problem = _problem(cfg, ds, er, cfg.weight)
    grid = problem.grid
    cuts = []
    for token in args.boundaries.split(","):
        hour = float(token)
        units = hour * grid.G / 24
        if abs(units - round(units)) > 1e-9 or not 0 <= round(units) <= grid.G:
            raise UsageError(f"boundary {token} h is not on the {grid.unit_hours:g} h grid")
        cuts.append(int(round(units)))
    if sorted(set(cuts)) != sorted(cuts) or cuts[0] != 0 or cuts[-1] != grid.G:
        raise UsageError("boundaries must be strictly increasing from 0 to 24")
    grid_b = PartitionGrid(grid.G, max(grid.B, len(cuts) - 1), grid.ell_units)
    if grid_b != grid:
        problem = PartitionProblem(ds, er, cfg.weight, TestConfig(cfg.alpha), grid_b)
    e = problem.evaluate(from_cuts(cuts, problem.grid))
    _emit(render(e, er, _meta(cfg, cfg.weeks, cfg.weight)), cfg.format)
    return EXIT_OK


def _fit_one(cfg: RunConfig, args: argparse.Namespace, weeks: int, w: float,
             cache: dict[int, tuple[ArrivalDataset, EmpiricalRate, PartitionProblem]],
             tag: str = "") -> tuple[ReportBundle, SolverRun]:
    if weeks not in cache:
        ds, er = _load(cfg, args, weeks)
        cache[weeks] = (ds, er, _problem(cfg, ds, er, w))
    ds, er, base = cache[weeks]
    problem = base.with_weight(w)
    run = solve_restarts(problem, _solver_config(cfg), cfg.restarts)
    bundle = render(run.best, er, _meta(cfg, weeks, w, run))
    write_bundle(_stem(cfg, args, tag), bundle, run)
    return bundle, run


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = _config(args)
    bundle, run = _fit_one(cfg, args, cfg.weeks, cfg.weight, {})
    _emit(bundle, cfg.format)
    if not run.feasible:
        print("no feasible partition found within the evaluation budget; "
              "reporting the minimum-violation partition", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    weights = cfg.weights or (cfg.weight,)
    weeks_list = cfg.weeks_list or (cfg.weeks,)
    cache: dict = {}
    any_infeasible = False
    summary = []
    for weeks in weeks_list:
        for w in weights:
            tag = f".m{weeks}.w{_fmt_num(w)}"
            bundle, run = _fit_one(cfg, args, weeks, w, cache, tag)
            any_infeasible |= not run.feasible
            part = bundle.partition
            summary.append((weeks, w, len(bundle.test_table), part["E"], part["S"], part["f"], run.feasible))
            if cfg.format != "text":
                _emit(bundle, cfg.format)
            else:
                print(f"== m={weeks} w={_fmt_num(w)}")
                _emit(bundle, cfg.format)
                print()
    if cfg.format == "text":
        print(f"{'m':>3} {'w':>8} {'N':>3} {'E':>12} {'S':>12} {'f':>12}  feasible")
        for weeks, w, n, E, S, f, ok in summary:
            print(f"{weeks:>3} {_fmt_num(w):>8} {n:>3} {E:>12.4f} {S:>12.4f} {f:>12.4f}  {ok}")
    return EXIT_INFEASIBLE if any_infeasible else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "bin": cmd_bin,
    "check": cmd_check,
    "fit": cmd_fit,
    "sweep": cmd_sweep,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, IngestError, ValueError, FileNotFoundError) as exc:
        print(f"nhppfit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
