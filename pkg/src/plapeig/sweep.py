"""Per-p sweep of every computed quantity, serialized to CSV so the
two-sided bound figures can be regenerated by any plotting tool.

Columns are in eigenvalue-root scale (value^(1/p)); the improved
estimates are emitted as reciprocal roots (delta^(-1/p)) so every column
is directly comparable with the eigenvalue curve.  Per row the bracket
ordering

    basic_lower_root <= delta_lower_inv_root <= lambda_root
        <= min(delta_upper_inv_root, delta_rayleigh_inv_root)
        <= basic_upper_root

is a theorem; ``row_ordering_ok`` checks it at float slack.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds as bounds_mod
from .exact import exact_eigenvalue
from .problem import Problem
from .quadrature import QuadConfig
from .shooting import solve_eigenvalue
from .weights import WeightFn

__all__ = ["CSV_COLUMNS", "SweepRow", "compute_row", "run_sweep", "write_csv", "row_ordering_ok"]

CSV_COLUMNS = [
    "p",
    "sigma_root",
    "basic_lower_root",
    "basic_upper_root",
    "delta_lower_inv_root",
    "delta_upper_inv_root",
    "delta_rayleigh_inv_root",
    "lambda_shoot_root",
    "lambda_exact_root",
]


@dataclass(frozen=True)
class SweepRow:
    p: float
    sigma_root: float
    basic_lower_root: float
    basic_upper_root: float
    delta_lower_inv_root: float
    delta_upper_inv_root: float
    delta_rayleigh_inv_root: float
    lambda_shoot_root: float
    lambda_exact_root: float  # nan when no closed form applies

    def as_list(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


def _has_exact(u: WeightFn, v: WeightFn, D: float) -> bool:
    def unit(w):
        return w.kind == "constant" and w.params[0] == 1.0

    return unit(u) and unit(v) and D == 1.0


def compute_row(args) -> SweepRow:
    """One sweep row; takes a picklable spec tuple so rows can run in
    worker processes."""
    u, v, D, p, boundary, truncation, grid_n, tail_tol, rel_tol = args
    quad = QuadConfig(rel_tol=rel_tol)
    problem = Problem(
        u, v, D=D, p=p, boundary=boundary,
        truncation=truncation, grid_n=grid_n, tail_tol=tail_tol, quad=quad,
    )
    sigma = bounds_mod.sigma_p(problem)
    low, up = bounds_mod.basic_bounds(problem, sigma)
    root = 1.0 / p
    if not np.isfinite(sigma):
        return SweepRow(p, np.inf, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                        exact_eigenvalue(p) ** root if _has_exact(problem.u, problem.v, D) else np.nan)
    d1 = bounds_mod.delta_lower(problem, sigma)
    d1p = bounds_mod.delta_upper(problem, sigma)
    d1r = bounds_mod.delta_rayleigh(problem, sigma)
    lam = solve_eigenvalue(problem).lam
    exact = exact_eigenvalue(p) ** root if _has_exact(problem.u, problem.v, D) else np.nan
    return SweepRow(
        p=p,
        sigma_root=sigma ** root,
        basic_lower_root=low ** root,
        basic_upper_root=up ** root,
        delta_lower_inv_root=(1.0 / d1) ** root,
        delta_upper_inv_root=(1.0 / d1p) ** root,
        delta_rayleigh_inv_root=(1.0 / d1r) ** root,
        lambda_shoot_root=lam ** root,
        lambda_exact_root=exact,
    )


def run_sweep(
    u: WeightFn,
    v: WeightFn,
    D: float,
    p_values,
    boundary="nd",
    truncation=None,
    grid_n=2048,
    tail_tol=1e-10,
    rel_tol=1e-10,
    jobs: int = 1,
) -> list[SweepRow]:
    """Compute one row per p.  Rows are independent, so jobs > 1 farms
    them to worker processes; output order is by p either way."""
    specs = [
        (u, v, D, float(p), boundary, truncation, grid_n, tail_tol, rel_tol)
        for p in p_values
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(compute_row, specs))
    else:
        rows = [compute_row(s) for s in specs]
    return rows


def _fmt(x: float) -> str:
    if np.isnan(x):
        return ""
    return f"{x:.15g}"


def write_csv(rows, path):
    """Fixed column order, header row, 15 significant digits, LF endings."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row.as_list()) + "\n")


def row_ordering_ok(row: SweepRow, slack: float = 1e-9) -> bool:
    """Bracket ordering of one row at relative slack."""
    up = 1.0 + slack
    chain = (
        row.basic_lower_root <= row.delta_lower_inv_root * up
        and row.delta_lower_inv_root <= row.lambda_shoot_root * up
        and row.lambda_shoot_root <= min(row.delta_upper_inv_root, row.delta_rayleigh_inv_root) * up
        and min(row.delta_upper_inv_root, row.delta_rayleigh_inv_root)
        <= row.basic_upper_root * up
    )
    return bool(chain)
