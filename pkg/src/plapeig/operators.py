"""Discrete realizations of the three bound-generating operators on
grid functions, membership validation for their admissible classes, and
the directed eigenvalue bounds a single test function yields.

The three forms, in the reflecting-at-0 case (mirrored for the
absorbing-at-0 case):

* single integral form
    ``-(1 / (v f' |f'|^(p-2)))(x) * integral_0^x f^(p-1) dmu``
* double integral form
    ``(1/f^(p-1)(x)) * [ integral_(x,D)^supp vhat(s)
    (integral_0^s f^(p-1) dmu)^(p*-1) ds ]^(p-1)``
* differential form
    ``u^(-1) [ -|h|^(p-2) (v' h + (p-1)(h^2 + h') v) ]``

By the reciprocal duality of the variational formulas, a member of an
unmodified class produces a lower eigenvalue bound and a member of the
compact-support modification produces an upper bound.

Vectorized grid passes: the inner cumulative is sampled once per cell on
a fixed Gauss rule, partial in-cell cumulatives come from a Lagrange
integration matrix, and the outer integral is a single backward (or
forward) cumulative sweep -- O(N) per test function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridfun import ClassCheck, ClassTag, GridFunction, OperatorKind
from .problem import BoundaryCase, Problem, odd_power, _TAU, _WQ, _M_LEFT
from .quadrature import QuadConfig, _growth_scan
from .search import refine_max, refine_min

__all__ = [
    "ClassViolationError",
    "DirectedBound",
    "DoubleProfile",
    "validate_class",
    "single_integral_op",
    "double_integral_op",
    "differential_op",
    "double_profile",
    "bound_from_test_function",
]

_VALUE_EPS = 1e-300


class ClassViolationError(ValueError):
    """Test function rejected by its declared admissible class."""

    def __init__(self, check: ClassCheck):
        super().__init__("; ".join(check.violations) or "class violation")
        self.report = check


@dataclass(frozen=True)
class DirectedBound:
    """A one-sided eigenvalue bound with its provenance."""

    value: float
    direction: str  # "lower" | "upper"
    kind: OperatorKind
    raw: float      # the sup/inf of the operator that was inverted
    argmin_or_max: float


# -- in-cell partial integration --------------------------------------------


def _partial_rows(tau_points):
    """Rows m(t) with m_k(t) = integral_0^t of the k-th Lagrange basis
    polynomial on the fixed cell rule nodes."""
    n = len(_TAU)
    V = np.vander(_TAU, n, increasing=True)
    C = np.linalg.inv(V)
    t = np.atleast_1d(np.asarray(tau_points, dtype=float))
    powers = np.arange(1, n + 1, dtype=float)
    T = t[:, None] ** powers[None, :] / powers[None, :]
    return T @ C


# -- the double integral form on the master grid -----------------------------


class DoubleProfile:
    """Double-integral-form values of one test function at every master
    grid node, with a cheap consistent evaluator between nodes."""

    def __init__(self, problem, f_eval, support_end=None):
        self.problem = problem
        self.f_eval = f_eval
        p, ps = problem.p, problem.p_star
        grid, H = problem.grid, problem._H
        case = problem.boundary

        fS = np.maximum(np.asarray(f_eval(problem._S), dtype=float), 0.0)
        self.f_nodes = np.maximum(np.asarray(f_eval(grid), dtype=float), 0.0)
        E = problem._U_S * fS ** (p - 1.0)
        cell = H * (E @ _WQ)

        if case is BoundaryCase.ND:
            inner_nodes = np.concatenate(([0.0], np.cumsum(cell)))
            inner_S = inner_nodes[:-1, None] + H[:, None] * (E @ _M_LEFT.T)
        else:
            # inner cumulative runs from s to the far end; capped test
            # functions are flat beyond their cap so the tail term
            # f(T)^(p-1) * mu_tail is exact for them
            tail = 0.0
            if not np.isfinite(problem.D):
                if not np.isfinite(problem.mu_tail):
                    self._everywhere_infinite()
                    return
                tail = self.f_nodes[-1] ** (p - 1.0) * problem.mu_tail
            inner_nodes = np.concatenate((np.cumsum(cell[::-1])[::-1], [0.0])) + tail
            m_right = _WQ[None, :] - _M_LEFT
            inner_S = inner_nodes[1:, None] + H[:, None] * (E @ m_right.T)

        G = problem._VHAT_S * inner_S ** (ps - 1.0)
        outer_cell = H * (G @ _WQ)

        self._cut_cell = None
        self._cut_tau = None
        outer_tail = 0.0
        T = problem.truncation
        if case is BoundaryCase.ND:
            if support_end is not None and support_end < T:
                j = int(np.searchsorted(grid, support_end, side="right") - 1)
                j = min(max(j, 0), len(H) - 1)
                tau = (support_end - grid[j]) / H[j]
                outer_cell[j] = H[j] * float(_partial_rows([tau]) @ G[j])
                outer_cell[j + 1 :] = 0.0
                self._cut_cell, self._cut_tau = j, tau
            elif not np.isfinite(problem.D):
                if not np.isfinite(problem.nu_tail):
                    self._everywhere_infinite()
                    return
                outer_tail = inner_nodes[-1] ** (ps - 1.0) * problem.nu_tail
            outer_nodes = np.concatenate((np.cumsum(outer_cell[::-1])[::-1], [0.0])) + outer_tail
        else:
            outer_nodes = np.concatenate(([0.0], np.cumsum(outer_cell)))

        self.inner_nodes = inner_nodes
        self.outer_nodes = outer_nodes
        self._G = G
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = outer_nodes / self.f_nodes
        ii = np.where(self.f_nodes > _VALUE_EPS, ratio, np.inf) ** (p - 1.0)
        # 0/0 at a support edge is the convention value +inf as well
        ii[~np.isfinite(ratio) | np.isnan(ii)] = np.inf
        self.ii_nodes = ii

    def _everywhere_infinite(self):
        n = len(self.problem.grid)
        self.inner_nodes = np.full(n, np.inf)
        self.outer_nodes = np.full(n, np.inf)
        self.ii_nodes = np.full(n, np.inf)
        self._G = None

    def outer_at(self, x: float) -> float:
        """Outer integral evaluated between master nodes, interpolating
        the sampled outer integrand polynomially within the cell."""
        problem = self.problem
        grid, H = problem.grid, problem._H
        if self._G is None:
            return np.inf
        i = int(np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(H) - 1))
        tau = (x - grid[i]) / H[i]
        if problem.boundary is BoundaryCase.ND:
            if self._cut_cell is not None:
                if i > self._cut_cell or (i == self._cut_cell and tau >= self._cut_tau):
                    return 0.0
                if i == self._cut_cell:
                    rows = _partial_rows([self._cut_tau, tau])
                    return H[i] * float((rows[0] - rows[1]) @ self._G[i])
            head = H[i] * float((_WQ - _partial_rows([tau])[0]) @ self._G[i])
            return self.outer_nodes[i + 1] + head
        part = H[i] * float(_partial_rows([tau])[0] @ self._G[i])
        return self.outer_nodes[i] + part

    def at(self, x: float) -> float:
        """Double integral form at an arbitrary point of (0, T)."""
        fx = float(np.maximum(self.f_eval(np.asarray(x, dtype=float)), 0.0))
        if fx <= _VALUE_EPS:
            return np.inf
        b = self.outer_at(x)
        if not np.isfinite(b):
            return np.inf
        return (b / fx) ** (self.problem.p - 1.0)


def double_profile(problem: Problem, f_eval, support_end=None) -> DoubleProfile:
    return DoubleProfile(problem, f_eval, support_end=support_end)


# -- memoized inner cumulative for pointwise operators ------------------------


def _inner_cumulative(problem: Problem, f: GridFunction):
    """Cumulative of f^(p-1) against the base measure, memoized per
    (problem, boundary case) on the grid function itself."""
    cache = getattr(f, "_inner_cum", None)
    if cache is None:
        cache = {}
        f._inner_cum = cache
    key = (id(problem), problem.boundary.value)
    if key not in cache:
        p = problem.p

        def integrand(x):
            return np.asarray(problem.u(x), dtype=float) * np.maximum(f(x), 0.0) ** (p - 1.0)

        if problem.boundary is BoundaryCase.ND:
            values, interp = problem.cumulative(integrand)
        else:
            tail = 0.0
            if not np.isfinite(problem.D) and np.isfinite(problem.mu_tail):
                tail = float(np.maximum(f(problem.truncation), 0.0)) ** (p - 1.0) * problem.mu_tail
            elif not np.isfinite(problem.D):
                tail = np.inf
            values, interp = problem.cumulative(integrand, backward=True, tail_init=tail)
        cache[key] = (values, interp)
    return cache[key]


def _clamp_eval(interp, problem, x):
    return interp(np.clip(np.asarray(x, dtype=float), 0.0, problem.truncation))


# -- the three operators, pointwise -------------------------------------------


def single_integral_op(problem: Problem, f: GridFunction, x):
    """Single integral form at interior points (vectorized over x).

    Uses the convention 1/0 = +inf where the segment slope vanishes.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    T = problem.truncation
    if np.any((xs <= 0.0) | (xs >= T)):
        raise ValueError(f"evaluation points must lie strictly inside (0, {T:g})")
    _, interp = _inner_cumulative(problem, f)
    mass = np.asarray(_clamp_eval(interp, problem, xs), dtype=float)
    slope = f.derivative(xs)
    slope = np.atleast_1d(np.asarray(slope, dtype=float))
    denom = np.asarray(problem.v(xs), dtype=float) * np.atleast_1d(odd_power(slope, problem.p))
    sign = -1.0 if problem.boundary is BoundaryCase.ND else 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = sign * mass / denom
    out = np.where(np.abs(denom) <= _VALUE_EPS, np.inf, out)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def double_integral_op(problem: Problem, f: GridFunction, x):
    """Double integral form at a point (or points); +inf where f = 0."""
    profile = getattr(f, "_double_profile", None)
    if profile is None or profile[0] != id(problem):
        prof = DoubleProfile(problem, f, support_end=f.support_end())
        f._double_profile = (id(problem), prof)
        profile = f._double_profile
    prof = profile[1]
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([prof.at(xi) for xi in xs])
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def double_integral_values(problem: Problem, f: GridFunction):
    """Double integral form at every master grid node."""
    return DoubleProfile(problem, f, support_end=f.support_end()).ii_nodes


def differential_op(problem: Problem, h: GridFunction, x):
    """Differential form at interior points (vectorized over x).

    The grid slope stands in for h'; v' is analytic for built-in weights
    and a centered difference otherwise.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    p = problem.p
    u = np.asarray(problem.u(xs), dtype=float)
    if np.any(u <= 0.0):
        raise ValueError("base weight vanishes at an evaluation point")
    v = np.asarray(problem.v(xs), dtype=float)
    vp = np.asarray(problem.v.derivative(xs), dtype=float)
    hv = np.atleast_1d(np.asarray(h(xs), dtype=float))
    hs = np.atleast_1d(np.asarray(h.derivative(xs), dtype=float))
    bracket = vp * hv + (p - 1.0) * (hv * hv + hs) * v
    if p == 2.0:
        mag = np.ones_like(hv)
    else:
        with np.errstate(divide="ignore"):
            mag = np.where(np.abs(hv) > _VALUE_EPS, np.abs(hv) ** (p - 2.0), 0.0 if p > 2.0 else np.inf)
    out = np.where(bracket == 0.0, 0.0, -mag * bracket / u)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


# -- class membership ---------------------------------------------------------


def _pl_integral(f: GridFunction, a: float, b: float) -> float:
    """Exact integral of the piecewise-linear function over [a, b]."""
    pts = f.grid[(f.grid > a) & (f.grid < b)]
    xs = np.concatenate(([a], pts, [b]))
    return float(np.trapezoid(f(xs), xs))


def _diverges_at_zero(problem: Problem, h: GridFunction) -> bool:
    """Window-halving growth test for the divergence of the integral of
    h at 0+, at grid resolution."""
    grid = h.grid
    top = min(problem.truncation / 8.0, grid[-1] / 8.0)
    floor = grid[1]
    if top <= floor:
        return False
    windows = []
    eps = top
    total = 0.0
    lo = top / 2.0
    total = _pl_integral(h, lo, eps)
    windows.append(total)
    while lo / 2.0 >= floor:
        nxt = lo / 2.0
        total += _pl_integral(h, nxt, lo)
        windows.append(total)
        if _growth_scan(windows, problem.quad):
            return True
        lo = nxt
    return False


def _plateau_split(values, tol):
    """Index ranges of a leading plateau and trailing zeros."""
    head_end = 0
    while head_end + 1 < len(values) and abs(values[head_end + 1] - values[0]) <= tol:
        head_end += 1
    tail_start = len(values)
    while tail_start - 1 >= 0 and abs(values[tail_start - 1]) <= tol:
        tail_start -= 1
    return head_end, tail_start


def validate_class(problem: Problem, f: GridFunction, tag: ClassTag) -> ClassCheck:
    """Check, at grid resolution, the sign / monotonicity / boundary
    conditions of the tagged admissible class."""
    case = tag.case if tag.case is not None else problem.boundary
    bad = []
    if tag.case is not None and tag.case is not problem.boundary:
        bad.append(f"tag case {tag.case.value} does not match problem case")
    vals = f.values
    interior = vals[1:-1]
    scale = float(np.max(np.abs(vals))) or 1.0
    tol = 1e-12 * scale

    if case is BoundaryCase.ND:
        if tag.kind is OperatorKind.SINGLE and not tag.modified:
            if np.any(interior <= 0.0):
                bad.append("must be positive on the open interval")
            if np.any(f.slopes >= 0.0):
                bad.append("must be strictly decreasing")
        elif tag.kind is OperatorKind.DOUBLE and not tag.modified:
            if np.any(interior <= 0.0):
                bad.append("must be positive on the open interval")
        elif tag.kind is OperatorKind.DIFFERENTIAL and not tag.modified:
            if abs(vals[0]) > tol:
                bad.append("must vanish at 0")
            if np.isfinite(problem.nu_hat(0.0, problem.D)):
                if np.any(interior >= 0.0):
                    bad.append("must be negative on the open interval (finite dual mass)")
            elif np.any(interior > tol):
                bad.append("must be nonpositive on the open interval (infinite dual mass)")
        elif tag.kind in (OperatorKind.SINGLE, OperatorKind.DOUBLE) and tag.modified:
            head_end, tail_start = _plateau_split(vals, tol)
            if tail_start >= len(vals):
                bad.append("needs a vanishing tail strictly inside the interval")
            if np.any(vals[: max(tail_start, 1)] < -tol):
                bad.append("must be nonnegative")
            if tag.kind is OperatorKind.SINGLE:
                if head_end < 1:
                    bad.append("needs a leading plateau (value frozen below the split point)")
                mid = f.slopes[head_end : max(tail_start - 1, head_end)]
                if np.any(mid >= 0.0):
                    bad.append("must be strictly decreasing between plateau and support end")
            else:
                if np.any(vals[: max(tail_start - 1, 1)] <= tol):
                    bad.append("must be positive on its support")
        elif tag.kind is OperatorKind.DIFFERENTIAL and tag.modified:
            head_end, tail_start = _plateau_split(vals, tol)
            if abs(vals[0]) > tol:
                bad.append("must vanish at 0")
            if tail_start >= len(vals):
                bad.append("needs a vanishing tail strictly inside the interval")
            body = vals[1:tail_start]
            if np.any(body >= 0.0):
                bad.append("must be negative on (0, split point)")
            xs = f.grid[1 : max(tail_start - 1, 1)]
            if len(xs):
                hv = f(xs)
                hs = f.derivative(xs)
                v = np.asarray(problem.v(xs), dtype=float)
                vp = np.asarray(problem.v.derivative(xs), dtype=float)
                if np.any(vp * hv + (problem.p - 1.0) * (hv * hv + hs) * v >= 0.0):
                    bad.append("drift bracket must stay negative on the support")
    else:  # DN
        if tag.kind is OperatorKind.SINGLE and not tag.modified:
            if abs(vals[0]) > tol:
                bad.append("must vanish at 0")
            if np.any(f.slopes <= 0.0):
                bad.append("must be strictly increasing")
        elif tag.kind is OperatorKind.DOUBLE and not tag.modified:
            if abs(vals[0]) > tol:
                bad.append("must vanish at 0")
            if np.any(interior <= 0.0):
                bad.append("must be positive on the open interval")
        elif tag.kind is OperatorKind.DIFFERENTIAL and not tag.modified:
            if np.any(interior <= 0.0):
                bad.append("must be positive on the open interval")
            if not _diverges_at_zero(problem, f):
                bad.append("integral at 0+ must diverge (growth test failed at grid resolution)")
        elif tag.kind in (OperatorKind.SINGLE, OperatorKind.DOUBLE) and tag.modified:
            if abs(vals[0]) > tol:
                bad.append("must vanish at 0")
            head_end, _ = _plateau_split(vals[::-1], tol)
            if head_end < 1:
                bad.append("needs a trailing cap (value frozen beyond the cap point)")
            rise = f.slopes[: len(f.slopes) - head_end]
            if tag.kind is OperatorKind.SINGLE and np.any(rise <= 0.0):
                bad.append("must be strictly increasing below the cap")
            if tag.kind is OperatorKind.DOUBLE and np.any(vals[1 : len(vals) - head_end] <= 0.0):
                bad.append("must be positive below the cap")
        elif tag.kind is OperatorKind.DIFFERENTIAL and tag.modified:
            head_end, tail_start = _plateau_split(vals, tol)
            if tail_start >= len(vals):
                bad.append("needs a vanishing tail strictly inside the interval")
            if np.any(vals[1:tail_start] <= 0.0):
                bad.append("must be positive on (0, split point)")
            if not _diverges_at_zero(problem, f):
                bad.append("integral at 0+ must diverge (growth test failed at grid resolution)")
    return ClassCheck(ok=not bad, violations=bad)


# -- directed bounds ----------------------------------------------------------


def _single_candidates(problem: Problem, f: GridFunction, below: float | None = None):
    """Evaluation points for the single form: segment midpoints and the
    interior nodes of the test function's own grid (the derivative is
    piecewise constant, so extremes live on segments)."""
    mids = 0.5 * (f.grid[:-1] + f.grid[1:])
    pts = np.unique(np.concatenate((mids, f.grid[1:-1])))
    hi = problem.truncation if below is None else min(problem.truncation, below)
    return pts[(pts > 0.0) & (pts < hi)]


def _last_nonzero_node(f: GridFunction) -> float:
    """Grid point of the last nonzero sample: the discrete stand-in for
    the jump location of a compact-support modification (the final
    descent-to-zero segment represents the jump itself and lies outside
    the inf/sup domain)."""
    nz = np.nonzero(np.abs(f.values) > 0.0)[0]
    if len(nz) == 0:
        return 0.0
    return float(f.grid[nz[-1]])


def bound_from_test_function(problem: Problem, f: GridFunction, tag: ClassTag) -> DirectedBound:
    """Directed eigenvalue bound from one admissible test function.

    Unmodified classes yield lower bounds, compact-support modifications
    yield upper bounds.  For the integral forms the bound is the
    reciprocal of the sup (resp. inf) of the operator; the differential
    form estimates the eigenvalue directly, so its inf (resp. sup) is
    the bound itself.
    """
    check = validate_class(problem, f, tag)
    if not check.ok:
        raise ClassViolationError(check)

    below = _last_nonzero_node(f) if tag.modified else None
    if tag.kind is OperatorKind.SINGLE:
        xs = _single_candidates(problem, f, below)
        vals = single_integral_op(problem, f, xs)
        evaluator = lambda x: single_integral_op(problem, f, x)
    elif tag.kind is OperatorKind.DOUBLE:
        prof = DoubleProfile(problem, f, support_end=f.support_end())
        xs = problem.grid[1:-1]
        vals = prof.ii_nodes[1:-1]
        if below is not None:
            keep = xs < below
            xs, vals = xs[keep], vals[keep]
        evaluator = prof.at
    else:
        xs = _single_candidates(problem, f, below)
        vals = differential_op(problem, f, xs)
        evaluator = lambda x: differential_op(problem, f, x)

    finite = np.isfinite(vals)
    if tag.modified:
        sel = finite & (vals > 0.0) if tag.kind is not OperatorKind.DIFFERENTIAL else finite
        if not sel.any():
            raise ValueError("operator nowhere finite on the support")
        x_opt, raw = refine_min(evaluator, xs[sel], vals[sel])
        if tag.kind is OperatorKind.DIFFERENTIAL:
            x_opt, raw = refine_max(evaluator, xs[sel], vals[sel])
            return DirectedBound(raw, "upper", tag.kind, raw, x_opt)
        return DirectedBound(1.0 / raw if raw > 0 else np.inf, "upper", tag.kind, raw, x_opt)
    if tag.kind is OperatorKind.DIFFERENTIAL:
        x_opt, raw = refine_min(evaluator, xs, np.where(finite, vals, np.inf))
        return DirectedBound(raw, "lower", tag.kind, raw, x_opt)
    if not finite.any():
        return DirectedBound(0.0, "lower", tag.kind, np.inf, float(xs[0]))
    x_opt, raw = refine_max(evaluator, xs[finite], vals[finite])
    return DirectedBound(1.0 / raw if raw > 0 else np.inf, "lower", tag.kind, raw, x_opt)
