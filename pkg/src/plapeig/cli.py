"""Command line entry point.

Subcommands: bounds | iterate | shoot | figure | certify.  A problem is
described either by flags or by an INI config file (flags win); see the
README for the schema.  Exit codes: 2 config/parse error, 3 computation
failure, 4 chain violation in certify.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from . import iterate as iterate_mod
from .problem import Problem
from .quadrature import QuadConfig
from .shooting import OracleFailure, solve_eigenvalue
from .sweep import run_sweep, row_ordering_ok, write_csv
from .weights import parse_weight

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_VIOLATION = 4

_CHAIN_SLACK = 1e-6


@dataclass
class RunConfig:
    command: str = "bounds"
    u_text: str = "1"
    v_text: str = "1"
    D: float = 1.0
    p: float = 2.0
    p_range: tuple | None = None  # (lo, hi, step)
    case: str = "nd"
    truncation: float | None = None
    out: str | None = None
    rel_tol: float = 1e-10
    tail_tol: float = 1e-10
    grid: int = 2048
    n_max: int = 4
    grid_m: int = 24
    jobs: int = 1
    echo: dict = field(default_factory=dict)


def _parse_d(text: str) -> float:
    if str(text).strip().lower() in ("inf", "infinity", "oo"):
        return np.inf
    return float(text)


def _parse_p_range(text: str):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError("p-range must be LO:HI:STEP")
    lo, hi, step = (float(t) for t in parts)
    if not (lo > 1.0 and hi >= lo and step > 0.0):
        raise ValueError("p-range must satisfy 1 < LO <= HI, STEP > 0")
    return (lo, hi, step)


def _load_config(path: str, cfg: RunConfig):
    ini = configparser.ConfigParser()
    read = ini.read(path)
    if not read:
        raise ValueError(f"config file not found: {path}")
    prob = ini["problem"] if ini.has_section("problem") else {}
    run = ini["run"] if ini.has_section("run") else {}
    num = ini["numerics"] if ini.has_section("numerics") else {}
    if "u" in prob:
        cfg.u_text = prob["u"]
    if "v" in prob:
        cfg.v_text = prob["v"]
    if "d" in prob:
        cfg.D = _parse_d(prob["d"])
    if "p" in prob:
        cfg.p = float(prob["p"])
    if "case" in prob:
        cfg.case = prob["case"].lower()
    if "truncation" in prob:
        cfg.truncation = float(prob["truncation"])
    if "p_range" in run:
        cfg.p_range = _parse_p_range(run["p_range"])
    if "out" in run:
        cfg.out = run["out"]
    if "n_max" in run:
        cfg.n_max = int(run["n_max"])
    if "grid_m" in run:
        cfg.grid_m = int(run["grid_m"])
    if "jobs" in run:
        cfg.jobs = int(run["jobs"])
    if "rel_tol" in num:
        cfg.rel_tol = float(num["rel_tol"])
    if "tail_tol" in num:
        cfg.tail_tol = float(num["tail_tol"])
    if "grid" in num:
        cfg.grid = int(num["grid"])


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="plapeig",
        description="Two-sided bounds and reference values for the principal "
        "mixed eigenvalue of the 1-d weighted p-Laplacian.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("bounds", "iterate", "shoot", "figure", "certify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="INI config file")
        sp.add_argument("--p", type=float, default=None)
        sp.add_argument("--p-range", default=None, help="LO:HI:STEP (figure only)")
        sp.add_argument("--case", choices=("nd", "dn"), default=None)
        sp.add_argument("--u", default=None, help="weight expression in x")
        sp.add_argument("--v", default=None, help="weight expression in x")
        sp.add_argument("--D", default=None, help="right endpoint (number or 'inf')")
        sp.add_argument("--truncation", type=float, default=None)
        sp.add_argument("--out", default=None, help="output CSV path")
        sp.add_argument("--rel-tol", type=float, default=None)
        sp.add_argument("--grid", type=int, default=None)
        sp.add_argument("--n-max", type=int, default=None)
    return parser


def _resolve(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if args.config:
        _load_config(args.config, cfg)
    if args.p is not None:
        cfg.p = args.p
    if args.p_range is not None:
        cfg.p_range = _parse_p_range(args.p_range)
    if args.case is not None:
        cfg.case = args.case
    if args.u is not None:
        cfg.u_text = args.u
    if args.v is not None:
        cfg.v_text = args.v
    if args.D is not None:
        cfg.D = _parse_d(args.D)
    if args.truncation is not None:
        cfg.truncation = args.truncation
    if args.out is not None:
        cfg.out = args.out
    if args.rel_tol is not None:
        cfg.rel_tol = args.rel_tol
    if args.grid is not None:
        cfg.grid = args.grid
    if args.n_max is not None:
        cfg.n_max = args.n_max
    if cfg.p_range is not None and cfg.command != "figure":
        raise ValueError("--p-range is only valid with the figure command")
    if cfg.command == "figure" and cfg.p_range is None:
        raise ValueError("figure requires --p-range LO:HI:STEP")
    if cfg.p <= 1.0:
        raise ValueError("p must exceed 1")
    cfg.echo = {
        "u": cfg.u_text,
        "v": cfg.v_text,
        "D": cfg.D,
        "case": cfg.case,
        "p": cfg.p if cfg.p_range is None else f"{cfg.p_range[0]}:{cfg.p_range[1]}:{cfg.p_range[2]}",
        "rel_tol": cfg.rel_tol,
        "tail_tol": cfg.tail_tol,
        "grid": cfg.grid,
        "n_max": cfg.n_max,
        "truncation": cfg.truncation,
    }
    return cfg


def _echo_header(cfg: RunConfig):
    print(f"# plapeig {cfg.command}")
    for key, val in cfg.echo.items():
        print(f"#   {key} = {val}")


def _problem(cfg: RunConfig, p=None) -> Problem:
    return Problem(
        parse_weight(cfg.u_text),
        parse_weight(cfg.v_text),
        D=cfg.D,
        p=cfg.p if p is None else p,
        boundary=cfg.case,
        truncation=cfg.truncation,
        grid_n=cfg.grid,
        tail_tol=cfg.tail_tol,
        quad=QuadConfig(rel_tol=cfg.rel_tol),
    )


def _cmd_bounds(cfg: RunConfig) -> int:
    report = bounds_mod.bounds_report(_problem(cfg))
    print(report.summary())
    return EXIT_OK


def _cmd_iterate(cfg: RunConfig) -> int:
    problem = _problem(cfg)
    state = iterate_mod.descending_sequence(problem, cfg.n_max)
    print("descending values (reciprocals are lower eigenvalue bounds):")
    for n, d in state.history:
        print(f"  n={n:2d}  delta={d:.12g}  lower={1.0 / d:.12g}")
    asc = iterate_mod.ascending_sequence(problem, min(cfg.n_max, 3), grid_m=cfg.grid_m)
    print("ascending values (reciprocals are upper eigenvalue bounds):")
    for n, d in enumerate(asc.deltas, start=1):
        x0, x1 = asc.parameters[n - 1]
        where = f"x0={x0:.6g}" + (f", x1={x1:.6g}" if x1 is not None else "")
        print(f"  n={n:2d}  delta={d:.12g}  upper={1.0 / d:.12g}  ({where})")
    return EXIT_OK


def _cmd_shoot(cfg: RunConfig) -> int:
    problem = _problem(cfg)
    res = solve_eigenvalue(problem)
    print(f"lambda        = {res.lam:.12g}")
    print(f"lambda^(1/p)  = {res.lam ** (1.0 / problem.p):.12g}")
    print(f"iterations    = {res.iterations}")
    print(f"residual      = {res.residual:.3g}")
    if res.truncated:
        print(f"# infinite domain truncated at T = {problem.truncation:g}; "
              "the truncated eigenvalue decreases toward the full-line value as T grows")
    return EXIT_OK


def _cmd_figure(cfg: RunConfig) -> int:
    lo, hi, step = cfg.p_range
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    p_values = np.round(lo + step * np.arange(count), 12)
    rows = run_sweep(
        parse_weight(cfg.u_text),
        parse_weight(cfg.v_text),
        cfg.D,
        p_values,
        boundary=cfg.case,
        truncation=cfg.truncation,
        grid_n=cfg.grid,
        tail_tol=cfg.tail_tol,
        rel_tol=cfg.rel_tol,
        jobs=cfg.jobs,
    )
    out = cfg.out or "sweep.csv"
    write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _cmd_certify(cfg: RunConfig) -> int:
    problem = _problem(cfg)
    report = bounds_mod.bounds_report(problem)
    print(report.summary())
    if not report.positivity:
        print("criterion: sigma_p = inf, lambda = 0 (nothing further to certify)")
        return EXIT_OK
    res = solve_eigenvalue(problem)
    state = iterate_mod.descending_sequence(problem, max(2, min(cfg.n_max, 4)))
    lam = res.lam
    print(f"lambda_shoot   = {lam:.12g}")
    up = 1.0 + _CHAIN_SLACK
    checks = [
        ("basic_lower <= 1/delta_lower", report.basic_lower <= up / report.delta_lower),
        ("1/delta_lower <= lambda", 1.0 / report.delta_lower <= lam * up),
        ("lambda <= 1/delta_upper", lam <= up / report.delta_upper),
        ("1/delta_upper <= basic_upper", 1.0 / report.delta_upper <= report.basic_upper * up),
        ("lambda <= 1/delta_rayleigh", lam <= up / report.delta_rayleigh),
        ("sigma <= delta_rayleigh <= p*sigma",
         report.sigma_p <= report.delta_rayleigh * up
         and report.delta_rayleigh <= problem.p * report.sigma_p * up),
        ("descending values decline",
         all(state.deltas[i] >= state.deltas[i + 1] * (1.0 - _CHAIN_SLACK)
             for i in range(len(state.deltas) - 1))),
    ]
    failed = False
    for name, ok in checks:
        print(f"  [{'PASS' if ok else 'FAIL'}] {name}")
        failed = failed or not ok
    return EXIT_VIOLATION if failed else EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit code 2 for usage errors
        return int(exc.code) if exc.code else EXIT_OK
    try:
        cfg = _resolve(args)
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _echo_header(cfg)
    handler = {
        "bounds": _cmd_bounds,
        "iterate": _cmd_iterate,
        "shoot": _cmd_shoot,
        "figure": _cmd_figure,
        "certify": _cmd_certify,
    }[cfg.command]
    try:
        return handler(cfg)
    except (OracleFailure, iterate_mod.IterationError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
