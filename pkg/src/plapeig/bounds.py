"""Explicit eigenvalue estimates: the split-point criterion constant,
the universal two-sided basic bounds, and the improved first-step
estimates whose reciprocals tighten both sides.

Directions, with lam the principal eigenvalue and sigma the criterion
constant (reflecting case shown; the absorbing case mirrors every
integral):

    (k(p) * sigma)^-1  <=  delta_lower^-1  <=  lam
    lam  <=  delta_upper^-1  <=  sigma^-1,     lam <= delta_rayleigh^-1
    sigma <= delta_rayleigh <= p * sigma

``sigma = inf`` is a meaningful verdict (the eigenvalue is 0) and turns
the basic bounds into (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import BoundaryCase, Problem, _TAU, _WQ
from .quadrature import QuadratureError, _growth_scan, integrate, integrate_to_infinity
from .search import golden_max, interior_candidates, refine_max

__all__ = [
    "BoundsReport",
    "sigma_p",
    "basic_bounds",
    "delta_lower",
    "delta_upper",
    "delta_rayleigh",
    "bounds_report",
]

_CANDIDATES = 512


def _candidates(problem: Problem) -> np.ndarray:
    return interior_candidates(0.0, problem.truncation, n=_CANDIDATES)


def _sup_with_refinement(fn_vec, fn_scalar, problem: Problem) -> float:
    xs = _candidates(problem)
    with np.errstate(invalid="ignore", over="ignore"):
        vals = np.asarray(fn_vec(xs), dtype=float)
    if np.any(np.isinf(vals) & ~np.isnan(vals)):
        return np.inf
    vals = np.where(np.isnan(vals), -np.inf, vals)
    _, best = refine_max(fn_scalar, xs, vals)
    return float(best)


# -- criterion constant -------------------------------------------------------


def _sigma_objective(problem: Problem):
    p = problem.p
    if problem.boundary is BoundaryCase.ND:
        def vec(x):
            return problem.mu_left(x) * problem.nu_hat_right(x) ** (p - 1.0)
    else:
        def vec(x):
            return problem.mu_right(x) * problem.nu_hat_left(x) ** (p - 1.0)
    return vec


def _sigma_beyond_truncation(problem: Problem, current: float) -> float:
    """Geometric probes past the truncation point for infinite domains:
    the split-point product may keep growing out there.  Applies the
    window-doubling growth rule to declare divergence."""
    if np.isfinite(problem.D):
        return current
    p = problem.p
    T = problem.truncation
    nd = problem.boundary is BoundaryCase.ND
    acc = problem.mu(0.0, T) if nd else problem.nu_hat(0.0, T)
    if not np.isfinite(acc):
        return np.inf
    best = current
    history = [max(current, 1e-300)]
    x = T
    for _ in range(32):
        x2 = 2.0 * x
        try:
            if nd:
                acc += integrate(problem.u, x, x2, problem.quad)
                outer = integrate_to_infinity(problem.v_hat, x2, problem.quad)
                product = acc * outer ** (p - 1.0)
            else:
                acc += integrate(problem.v_hat, x, x2, problem.quad)
                outer = integrate_to_infinity(problem.u, x2, problem.quad)
                product = outer * acc ** (p - 1.0)
        except QuadratureError:
            return np.inf
        if not np.isfinite(product):
            return np.inf
        best = max(best, product)
        history.append(max(best, 1e-300))
        if _growth_scan(history, problem.quad):
            return np.inf
        if product < 1e-4 * best:
            break
        x = x2
    return best


def sigma_p(problem: Problem) -> float:
    """sup over split points of (mass below) * (dual mass above)^(p-1)
    (reflecting case; mirrored for the absorbing case).  Finiteness is
    equivalent to a positive principal eigenvalue."""
    vec = _sigma_objective(problem)
    sup = _sup_with_refinement(vec, lambda x: float(vec(np.asarray(x))), problem)
    if not np.isfinite(sup):
        return np.inf
    return _sigma_beyond_truncation(problem, sup)


def sigma_p_truncated(problem: Problem) -> float:
    """Criterion constant of the problem restricted to [0, T]: drops the
    beyond-truncation tails, so it is finite for truncated studies of
    domains whose full-line constant diverges."""
    p = problem.p
    T = problem.truncation
    if problem.boundary is BoundaryCase.ND:
        def vec(x):
            base = problem._nu_table.finite_total - problem._nu_table._cum(x)
            return problem.mu_left(x) * base ** (p - 1.0)
    else:
        def vec(x):
            base = problem._mu_table.finite_total - problem._mu_table._cum(x)
            return base * problem.nu_hat_left(x) ** (p - 1.0)
    return _sup_with_refinement(vec, lambda x: float(vec(np.asarray(x))), problem)


def basic_bounds(problem: Problem, sigma: float | None = None) -> tuple[float, float]:
    """Two-sided basic estimates ((k(p) sigma)^-1, sigma^-1); (0, 0)
    signals a zero eigenvalue when sigma is infinite."""
    if sigma is None:
        sigma = sigma_p(problem)
    if not np.isfinite(sigma):
        return (0.0, 0.0)
    return (1.0 / (problem.exponent.k_p * sigma), 1.0 / sigma)


def _require_finite_sigma(problem: Problem, sigma: float | None) -> float:
    if sigma is None:
        sigma = sigma_p(problem)
    if not np.isfinite(sigma):
        raise ValueError(
            "criterion constant is infinite (eigenvalue 0); improved "
            "estimates are undefined"
        )
    return sigma


# -- improved first-step estimates --------------------------------------------


def delta_lower(problem: Problem, sigma: float | None = None) -> float:
    """First descending-sequence value; its reciprocal improves the
    basic lower eigenvalue bound."""
    _require_finite_sigma(problem, sigma)
    p, ps = problem.p, problem.p_star
    r = (p - 1.0) / ps
    try:
        if problem.boundary is BoundaryCase.ND:
            def inner(t):
                return np.asarray(problem.u(t), dtype=float) * problem.nu_hat_right(t) ** r

            a_nodes, a_interp = problem.cumulative(inner)
            tail = 0.0
            if not np.isfinite(problem.D):
                tail = a_nodes[-1] ** (ps - 1.0) * problem.nu_tail

            def outer(s):
                return problem.v_hat(s) * np.asarray(a_interp(np.clip(s, 0, problem.truncation)), dtype=float) ** (ps - 1.0)

            _, b_interp = problem.cumulative(outer, backward=True, tail_init=tail)

            def vec(x):
                x = np.clip(x, 0, problem.truncation)
                return (problem.nu_hat_right(x) ** (-1.0 / ps) * b_interp(x)) ** (p - 1.0)
        else:
            tail = 0.0
            if not np.isfinite(problem.D):
                total_nu = problem.nu_hat(0.0, problem.D)
                if not np.isfinite(total_nu):
                    return np.inf
                tail = total_nu ** r * problem.mu_tail
                if not np.isfinite(tail):
                    return np.inf

            def inner(t):
                return np.asarray(problem.u(t), dtype=float) * problem.nu_hat_left(t) ** r

            a_nodes, a_interp = problem.cumulative(inner, backward=True, tail_init=tail)

            def outer(s):
                return problem.v_hat(s) * np.asarray(a_interp(np.clip(s, 0, problem.truncation)), dtype=float) ** (ps - 1.0)

            _, b_interp = problem.cumulative(outer)

            def vec(x):
                x = np.clip(x, 0, problem.truncation)
                return (problem.nu_hat_left(x) ** (-1.0 / ps) * b_interp(x)) ** (p - 1.0)
    except QuadratureError:
        return np.inf
    return _sup_with_refinement(vec, lambda x: float(vec(np.asarray(x))), problem)


class _UpperEvaluator:
    """Shared machinery for the ascending first value: per split point x
    the inner cumulative shifts by a constant, so the outer integral is
    one weighted sweep over precomputed cell samples."""

    def __init__(self, problem: Problem):
        self.problem = problem
        p, ps = problem.p, problem.p_star
        self.p, self.ps = p, ps
        self.nd = problem.boundary is BoundaryCase.ND
        if self.nd:
            integrand = lambda t: np.asarray(problem.u(t), dtype=float) * problem.nu_hat_right(t) ** (p - 1.0)
            self.P_nodes, self.P = problem.cumulative(integrand)
        else:
            integrand = lambda t: np.asarray(problem.u(t), dtype=float) * problem.nu_hat_left(t) ** (p - 1.0)
            self.P_nodes, self.P = problem.cumulative(integrand, backward=True)
        self.P_S = np.asarray(self.P(problem._S), dtype=float)
        self.W_S = problem._H[:, None] * _WQ[None, :] * problem._VHAT_S

    def _partial(self, a, b, shift):
        """integral over [a, b] of vhat(s) * (shift + P(s))^(ps-1) ds."""
        problem = self.problem
        pts = a + (b - a) * _TAU
        pv = np.asarray(self.P(np.clip(pts, 0, problem.truncation)), dtype=float)
        vals = problem.v_hat(pts) * np.maximum(shift + pv, 0.0) ** (self.ps - 1.0)
        return (b - a) * float(_WQ @ vals)

    def outer_nd(self, x: float) -> float:
        problem = self.problem
        grid, T = problem.grid, problem.truncation
        nu_x = float(problem.nu_hat_right(np.asarray(x)))
        mu_x = float(problem.mu_left(np.asarray(x)))
        shift = nu_x ** (self.p - 1.0) * mu_x - float(self.P(np.clip(x, 0, T)))
        i = int(np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2))
        body = float(np.sum(self.W_S[i + 1 :] * np.maximum(shift + self.P_S[i + 1 :], 0.0) ** (self.ps - 1.0)))
        head = self._partial(x, grid[i + 1], shift)
        tail = 0.0
        if not np.isfinite(problem.D):
            g_end = shift + self.P_nodes[-1]
            tail = max(g_end, 0.0) ** (self.ps - 1.0) * problem.nu_tail
        return head + body + tail

    def outer_dn(self, x: float) -> float:
        problem = self.problem
        grid, T = problem.grid, problem.truncation
        nu_x = float(problem.nu_hat_left(np.asarray(x)))
        mu_right = float(problem.mu_right(np.asarray(x)))
        # inner(s) = (Pb(s) - Pb(x)) + nu_x^(p-1) * mu(x, D) for s < x
        shift = nu_x ** (self.p - 1.0) * mu_right - float(self.P(np.clip(x, 0, T)))
        i = int(np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2))
        body = float(np.sum(self.W_S[:i] * np.maximum(shift + self.P_S[:i], 0.0) ** (self.ps - 1.0)))
        head = self._partial(grid[i], x, shift)
        return body + head

    def objective(self, x: float) -> float:
        problem = self.problem
        if self.nd:
            nu_x = float(problem.nu_hat_right(np.asarray(x)))
            if nu_x <= 0.0:
                return 0.0
            return nu_x ** (1.0 - self.p) * self.outer_nd(x) ** (self.p - 1.0)
        nu_x = float(problem.nu_hat_left(np.asarray(x)))
        if nu_x <= 0.0:
            return 0.0
        return nu_x ** (1.0 - self.p) * self.outer_dn(x) ** (self.p - 1.0)


def delta_upper(problem: Problem, sigma: float | None = None) -> float:
    """First ascending-sequence value; its reciprocal improves the basic
    upper eigenvalue bound."""
    _require_finite_sigma(problem, sigma)
    try:
        ev = _UpperEvaluator(problem)
    except QuadratureError:
        return np.inf
    xs = _candidates(problem)
    vals = np.array([ev.objective(x) for x in xs])
    _, best = refine_max(ev.objective, xs, vals)
    return float(best)


def delta_rayleigh(problem: Problem, sigma: float | None = None) -> float:
    """First Rayleigh-quotient value, pinned inside [sigma, p * sigma];
    its reciprocal upper-bounds the eigenvalue."""
    _require_finite_sigma(problem, sigma)
    p = problem.p
    try:
        if problem.boundary is BoundaryCase.ND:
            integrand = lambda t: np.asarray(problem.u(t), dtype=float) * problem.nu_hat_right(t) ** p
            # beyond-truncation tail is <= (1+p) sigma * (neglected dual tail)
            _, q_interp = problem.cumulative(integrand, backward=True)

            def vec(x):
                x = np.clip(x, 0, problem.truncation)
                nu = problem.nu_hat_right(x)
                with np.errstate(divide="ignore", invalid="ignore"):
                    second = np.asarray(q_interp(x), dtype=float) / nu
                return problem.mu_left(x) * nu ** (p - 1.0) + np.where(nu > 0, second, 0.0)
        else:
            integrand = lambda t: np.asarray(problem.u(t), dtype=float) * problem.nu_hat_left(t) ** p
            _, q_interp = problem.cumulative(integrand)

            def vec(x):
                x = np.clip(x, 0, problem.truncation)
                nu = problem.nu_hat_left(x)
                with np.errstate(divide="ignore", invalid="ignore"):
                    second = np.asarray(q_interp(x), dtype=float) / nu
                return problem.mu_right(x) * nu ** (p - 1.0) + np.where(nu > 0, second, 0.0)
    except QuadratureError:
        return np.inf
    return _sup_with_refinement(vec, lambda x: float(vec(np.asarray(x))), problem)


# -- assembled report ----------------------------------------------------------


@dataclass(frozen=True)
class BoundsReport:
    """All explicit estimates for one problem, with direction tags baked
    into the field names (``*_lower``/``*_upper`` bound the eigenvalue
    from that side)."""

    sigma_p: float
    positivity: bool
    basic_lower: float
    basic_upper: float
    delta_lower: float
    delta_upper: float
    delta_rayleigh: float
    lower_best: float
    upper_best: float

    def summary(self) -> str:
        lines = [
            f"sigma_p        = {self.sigma_p:.12g}",
            f"positivity     = {self.positivity}",
            f"basic bounds   : {self.basic_lower:.12g} <= lambda <= {self.basic_upper:.12g}",
        ]
        if self.positivity:
            lines += [
                f"delta_lower    = {self.delta_lower:.12g}  (lower bound {1.0 / self.delta_lower:.12g})",
                f"delta_upper    = {self.delta_upper:.12g}  (upper bound {1.0 / self.delta_upper:.12g})",
                f"delta_rayleigh = {self.delta_rayleigh:.12g}  (upper bound {1.0 / self.delta_rayleigh:.12g})",
                f"best bracket   : {self.lower_best:.12g} <= lambda <= {self.upper_best:.12g}",
            ]
        return "\n".join(lines)


def bounds_report(problem: Problem) -> BoundsReport:
    sigma = sigma_p(problem)
    low, up = basic_bounds(problem, sigma)
    if not np.isfinite(sigma):
        return BoundsReport(
            sigma_p=sigma,
            positivity=False,
            basic_lower=0.0,
            basic_upper=0.0,
            delta_lower=np.inf,
            delta_upper=np.inf,
            delta_rayleigh=np.inf,
            lower_best=0.0,
            upper_best=0.0,
        )
    d1 = delta_lower(problem, sigma)
    d1p = delta_upper(problem, sigma)
    d1r = delta_rayleigh(problem, sigma)
    lower_best = max(low, 1.0 / d1 if d1 > 0 else 0.0)
    upper_candidates = [up]
    if np.isfinite(d1p) and d1p > 0:
        upper_candidates.append(1.0 / d1p)
    if np.isfinite(d1r) and d1r > 0:
        upper_candidates.append(1.0 / d1r)
    return BoundsReport(
        sigma_p=sigma,
        positivity=True,
        basic_lower=low,
        basic_upper=up,
        delta_lower=d1,
        delta_upper=d1p,
        delta_rayleigh=d1r,
        lower_best=lower_best,
        upper_best=min(upper_candidates),
    )
