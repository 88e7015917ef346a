"""Approximating sequences that tighten the basic estimates step by
step.

* descending values: seed f_1 = (dual mass to the far side)^(1/p*),
  iterate f_{n+1} = f_n * II(f_n)^(p*-1), record sup II(f_n).  Each
  reciprocal is a lower eigenvalue bound and the sequence declines.
* ascending values: the same iteration run inside a two-parameter
  family of compactly supported (reflecting case) or capped (absorbing
  case) seeds; sup over the family of inf II gives an ascending
  sequence of reciprocal upper bounds.
* Rayleigh values: the p-norm over p-Dirichlet-form quotient of the
  family members, another upper-bound generator.

The exponent identity (p-1)(p*-1) = 1 collapses the iteration update:
f_{n+1} = f_n * II(f_n)^(p*-1) is exactly the outer cumulative of the
double form, so each step is one O(N) sweep.  Step 1 evaluates the seed
analytically (dual-mass tables); later iterates live on the master grid
as piecewise-linear functions.  Iterates are renormalized each step
(the double form is scale invariant of degree 0), preventing the
lam^-n value decay from underflowing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gridfun import GridFunction
from .operators import DoubleProfile
from .problem import BoundaryCase, Problem, _WQ
from .quadrature import integrate
from .search import golden_max, interior_candidates, refine_min

__all__ = [
    "IterationError",
    "IterationState",
    "AscendingState",
    "descending_sequence",
    "ascending_sequence",
    "rayleigh_value",
]


class IterationError(RuntimeError):
    """The iteration produced a divergent or degenerate value."""


@dataclass
class IterationState:
    """Descending-sequence run: values, lower eigenvalue bounds, and the
    final (renormalized) iterate."""

    deltas: list
    f: GridFunction
    history: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.deltas)

    @property
    def lower_bounds(self) -> np.ndarray:
        return 1.0 / np.asarray(self.deltas)

    @property
    def final_gap(self) -> float:
        if len(self.deltas) < 2:
            return np.inf
        return abs(self.deltas[-1] - self.deltas[-2]) / abs(self.deltas[-1])


@dataclass
class AscendingState:
    """Ascending-sequence run: values, upper eigenvalue bounds, and the
    optimizing family parameters per step."""

    deltas: list
    parameters: list

    @property
    def n(self) -> int:
        return len(self.deltas)

    @property
    def upper_bounds(self) -> np.ndarray:
        return 1.0 / np.asarray(self.deltas)


def _pl_closure(grid, values):
    return lambda x: np.interp(np.asarray(x, dtype=float), grid, values)


def _seed_eval(problem: Problem):
    ps = problem.p_star
    if problem.boundary is BoundaryCase.ND:
        return lambda x: problem.nu_hat_right(np.asarray(x, dtype=float)) ** (1.0 / ps)
    return lambda x: problem.nu_hat_left(np.asarray(x, dtype=float)) ** (1.0 / ps)


def _sup_profile(problem: Problem, prof: DoubleProfile) -> float:
    vals = prof.ii_nodes
    finite = np.isfinite(vals)
    finite[0] = finite[0] and problem.boundary is BoundaryCase.ND
    finite[-1] = False
    if not finite.any():
        return np.inf
    xs = problem.grid[finite]
    from .search import refine_max

    _, best = refine_max(prof.at, xs, vals[finite], iters=60)
    return float(best)


def descending_sequence(problem: Problem, n_max: int, rel_stop: float = 1e-8) -> IterationState:
    """First n_max descending values (early stop once consecutive values
    agree to rel_stop)."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    f_eval = _seed_eval(problem)
    grid = problem.grid
    deltas = []
    f_nodes = np.maximum(np.asarray(f_eval(grid), dtype=float), 0.0)
    for n in range(1, n_max + 1):
        prof = DoubleProfile(problem, f_eval)
        delta = _sup_profile(problem, prof)
        if not np.isfinite(delta) or delta <= 0.0:
            raise IterationError(f"double form diverged at step {n}")
        deltas.append(delta)
        f_nodes = prof.outer_nodes.copy()  # = f * II(f)^(p*-1)
        norm = f_nodes[0] if problem.boundary is BoundaryCase.ND else np.max(f_nodes)
        if norm <= 0.0:
            raise IterationError(f"iterate degenerated at step {n}")
        f_nodes = f_nodes / norm
        f_eval = _pl_closure(grid, f_nodes)
        if len(deltas) >= 2 and abs(deltas[-1] - deltas[-2]) <= rel_stop * abs(deltas[-1]):
            break
    state = IterationState(deltas=deltas, f=GridFunction(grid, f_nodes))
    state.history = list(enumerate(deltas, start=1))
    return state


# -- two-parameter (reflecting) / capped (absorbing) families -----------------


def _family_seed_nd(problem: Problem, x0: float, x1: float):
    cum = problem._nu_table._cum

    def f1(x):
        x = np.asarray(x, dtype=float)
        vals = cum(np.asarray(x1)) - cum(np.maximum(x, x0))
        return np.where(x < x1, np.maximum(vals, 0.0), 0.0)

    return f1


def _family_seed_dn(problem: Problem, x0: float):
    cum = problem._nu_table._cum

    def f1(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(cum(np.minimum(x, x0)), dtype=float)

    return f1


def _family_iterate(problem: Problem, n: int, x0: float, x1: float | None):
    """f_n of the family as (profile of f_n, f_n evaluator)."""
    nd = problem.boundary is BoundaryCase.ND
    f_eval = _family_seed_nd(problem, x0, x1) if nd else _family_seed_dn(problem, x0)
    grid = problem.grid
    prof = DoubleProfile(problem, f_eval, support_end=x1 if nd else None)
    for _ in range(n - 1):
        if nd:
            f_nodes = prof.outer_nodes.copy()
        else:
            cap_val = prof.outer_at(x0)
            f_nodes = np.where(grid <= x0, prof.outer_nodes, cap_val)
        top = float(np.max(f_nodes))
        if not np.isfinite(top) or top <= 0.0:
            raise IterationError("family iterate degenerated")
        f_nodes = f_nodes / top
        f_eval = _pl_closure(grid, f_nodes)
        prof = DoubleProfile(problem, f_eval, support_end=x1 if nd else None)
    return prof, f_eval


def _family_inf(problem: Problem, n: int, x0: float, x1: float | None) -> float:
    prof, _ = _family_iterate(problem, n, x0, x1)
    grid = problem.grid
    if problem.boundary is BoundaryCase.ND:
        sel = (grid > 0.0) & (grid < x1) & np.isfinite(prof.ii_nodes)
    else:
        sel = (grid > 0.0) & (grid < grid[-1]) & np.isfinite(prof.ii_nodes)
    if not sel.any():
        return np.nan
    _, worst = refine_min(prof.at, grid[sel], prof.ii_nodes[sel], iters=60)
    return float(worst)


def _pair_grid(problem: Problem, m: int):
    T = problem.truncation
    x0s = interior_candidates(0.0, T, n=m)
    if problem.boundary is BoundaryCase.DN:
        return [(float(x), None) for x in x0s]
    x1s = np.append(interior_candidates(0.0, T, n=m), T)
    min_gap = 2.0 * float(np.median(problem._H))
    pairs = [(float(a), float(b)) for a in x0s for b in x1s if b - a >= min_gap]
    return pairs


def _descend_parameters(problem: Problem, objective, x0: float, x1: float | None, rounds: int = 2):
    """Coordinate-wise golden ascent around a grid optimum."""
    T = problem.truncation
    min_gap = 2.0 * float(np.median(problem._H))
    best = objective(x0, x1)
    for _ in range(rounds):
        span = 0.25 * (x1 - x0) if x1 is not None else 0.25 * (T - x0)
        lo = max(x0 - span, 1e-6 * T)
        hi = min(x0 + span, (x1 - min_gap) if x1 is not None else T * (1 - 1e-9))
        if hi > lo:
            cand, val = golden_max(lambda a: objective(a, x1), lo, hi, iters=40)
            if val > best:
                best, x0 = val, cand
        if x1 is not None:
            lo1 = x0 + min_gap
            hi1 = T
            if hi1 > lo1:
                cand, val = golden_max(lambda b: objective(x0, b), lo1, hi1, iters=40)
                if val > best:
                    best, x1 = val, cand
    return best, x0, x1


def ascending_sequence(problem: Problem, n_max: int, grid_m: int = 24) -> AscendingState:
    """First n_max ascending values over the family parameter search:
    coarse grid of split parameters, then coordinate-wise refinement."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    pairs = _pair_grid(problem, grid_m)
    deltas = []
    params = []
    for n in range(1, n_max + 1):
        vals = []
        for (a, b) in pairs:
            try:
                vals.append(_family_inf(problem, n, a, b))
            except IterationError:
                vals.append(np.nan)
        vals = np.asarray(vals)
        if not np.isfinite(vals).any():
            raise IterationError(f"no admissible family member at step {n}")
        k = int(np.nanargmax(vals))
        x0, x1 = pairs[k]
        best, x0, x1 = _descend_parameters(
            problem, lambda a, b: _family_inf(problem, n, a, b), x0, x1
        )
        deltas.append(float(best))
        params.append((x0, x1))
    return AscendingState(deltas=deltas, parameters=params)


# -- Rayleigh quotients of the family ------------------------------------------


def _rayleigh_member(problem: Problem, n: int, x0: float, x1: float | None) -> float:
    """p-norm^p over p-Dirichlet form of the n-th family member."""
    p = problem.p
    T = problem.truncation
    nd = problem.boundary is BoundaryCase.ND
    cum = problem._nu_table._cum
    if n == 1:
        # exact family seed: broken dual-mass profiles
        if nd:
            nu01 = float(cum(np.asarray(x1)) - cum(np.asarray(x0)))
            head = problem.mu(0.0, x0) * nu01 ** p
            body = integrate(
                lambda s: np.asarray(problem.u(s), dtype=float)
                * np.maximum(cum(np.asarray(x1)) - cum(np.asarray(s)), 0.0) ** p,
                x0,
                x1,
                problem.quad,
            )
            dirichlet = nu01
            return (head + body) / dirichlet
        nu0 = float(cum(np.asarray(x0)))
        body = integrate(
            lambda s: np.asarray(problem.u(s), dtype=float)
            * np.asarray(cum(np.minimum(np.asarray(s, dtype=float), x0)), dtype=float) ** p,
            0.0,
            T,
            problem.quad,
        )
        tail = nu0 ** p * problem.mu_tail if not np.isfinite(problem.D) else 0.0
        return (body + tail) / nu0
    _, f_eval = _family_iterate(problem, n, x0, x1)
    grid = problem.grid
    f_nodes = np.asarray(f_eval(grid), dtype=float)
    fS = np.asarray(f_eval(problem._S), dtype=float)
    norm_p = float(np.sum(problem._H * ((problem._U_S * np.abs(fS) ** p) @ _WQ)))
    if not np.isfinite(problem.D):
        norm_p += abs(f_nodes[-1]) ** p * problem.mu_tail
    slopes = np.diff(f_nodes) / problem._H
    v_cells = problem._H * (problem._V_S @ _WQ)
    dirichlet = float(np.sum(np.abs(slopes) ** p * v_cells))
    if dirichlet <= 0.0:
        return np.nan
    return norm_p / dirichlet


def rayleigh_value(problem: Problem, n: int = 1, grid_m: int = 24) -> float:
    """n-th Rayleigh-quotient value: sup over the family parameters of
    the member quotient.  Its reciprocal upper-bounds the eigenvalue."""
    if n < 1:
        raise ValueError("n must be at least 1")
    pairs = _pair_grid(problem, grid_m)
    vals = []
    for (a, b) in pairs:
        try:
            vals.append(_rayleigh_member(problem, n, a, b))
        except IterationError:
            vals.append(np.nan)
    vals = np.asarray(vals)
    if not np.isfinite(vals).any():
        raise IterationError("no admissible family member")
    k = int(np.nanargmax(vals))
    x0, x1 = pairs[k]
    best, _, _ = _descend_parameters(
        problem, lambda a, b: _rayleigh_member(problem, n, a, b), x0, x1
    )
    return float(best)
