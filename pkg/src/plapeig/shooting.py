"""High-accuracy reference eigenvalue via shooting.

The eigenequation ``(v |g'|^(p-2) g')' = -lam u |g|^(p-2) g`` becomes a
first-order system in (g, w) with the flux w = v |g'|^(p-2) g':

    g' = sgn(w) (|w| / v)^(p*-1),      w' = -lam u |g|^(p-2) g

Reflecting-at-0 runs start from (g, w) = (1, 0), absorbing-at-0 runs
from (0, 1); integration uses an adaptive embedded 4th/5th-order pair.
The reference eigenvalue is the smallest lam that zeroes the far-end
boundary functional (g there in the reflecting case, w in the absorbing
case), found by bisection inside the basic-estimate bracket of the
truncated problem followed by a secant polish.  Principality is
verified by sign-change counting, not trusted from the bracket: higher
eigenvalues also zero the boundary functional, but only the first
eigenfunction keeps g and g' one-signed.

The very first step leaves the degenerate corner analytically: at a
reflecting start w = 0 and the nonlinearity sgn(w)|w/v|^(p*-1) is not
Lipschitz in w for p > 2, so the series values g = 1,
w = -lam * mu(0, x0) (resp. g = nu_hat(0, x0), w = 1) are used at a
tiny offset x0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bounds import sigma_p_truncated
from .gridfun import GridFunction
from .problem import BoundaryCase, Problem, odd_power

__all__ = ["ShootResult", "OracleFailure", "shoot_once", "solve_eigenvalue"]

_START_FRACTION = 1e-9
_SIGN_FLOOR = 1e-11


class OracleFailure(RuntimeError):
    """The shooting oracle could not certify a principal eigenvalue."""


@dataclass
class ShotState:
    g_end: float
    w_end: float
    sign_changes: int
    xs: np.ndarray
    g: np.ndarray
    w: np.ndarray


@dataclass
class ShootResult:
    """Reference eigenvalue with eigenfunction and flux samples."""

    lam: float
    g: GridFunction
    w: GridFunction
    iterations: int
    residual: float
    truncated: bool  # True when an infinite domain was cut at the truncation point


def _start_state(problem: Problem, lam: float):
    x0 = _START_FRACTION * problem.truncation
    if problem.boundary is BoundaryCase.ND:
        return x0, (1.0, -lam * problem.mu(0.0, x0))
    return x0, (problem.nu_hat(0.0, x0), 1.0)


def shoot_once(problem: Problem, lam: float, sample_points=None, rtol=1e-10, atol=1e-12) -> ShotState:
    """Integrate the eigen-system once across (0, T) at a trial lam.

    Returns terminal values and the interior sign-change count of the
    monitored component (g for reflecting, w for absorbing starts).
    """
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    p, ps = problem.p, problem.p_star
    u, v = problem.u, problem.v

    def rhs(x, y):
        g, w = y
        dg = np.sign(w) * (abs(w) / float(v(x))) ** (ps - 1.0) if w != 0.0 else 0.0
        dw = -lam * float(u(x)) * odd_power(g, p)
        return (dg, dw)

    x0, y0 = _start_state(problem, lam)
    T = problem.truncation
    t_eval = None
    if sample_points is not None:
        t_eval = np.asarray(sample_points, dtype=float)
        t_eval = t_eval[(t_eval >= x0) & (t_eval <= T)]
    sol = solve_ivp(rhs, (x0, T), y0, method="RK45", rtol=rtol, atol=atol, t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise OracleFailure(f"integration failed at lam={lam:.12g}: {sol.message}")
    g, w = sol.y[0], sol.y[1]
    monitored = g if problem.boundary is BoundaryCase.ND else w
    scale = float(np.max(np.abs(monitored))) or 1.0
    signs = np.sign(monitored[np.abs(monitored) > _SIGN_FLOOR * scale])
    changes = int(np.count_nonzero(np.diff(signs) != 0.0))
    return ShotState(float(g[-1]), float(w[-1]), changes, sol.t, g, w)


def _past_principal(problem: Problem, shot: ShotState) -> bool:
    end = shot.g_end if problem.boundary is BoundaryCase.ND else shot.w_end
    return shot.sign_changes > 0 or end < 0.0


def solve_eigenvalue(problem: Problem, n_samples: int = 2049, rtol=1e-10, atol=1e-12) -> ShootResult:
    """Smallest eigenvalue of the problem restricted to [0, T].

    The initial bracket is the basic-estimate pair of the truncated
    problem (theorem-backed, so a straddle failure after two doublings
    is reported as oracle failure rather than extrapolated).  For
    infinite domains the answer carries a truncation caveat; the
    truncated eigenvalue decreases toward the full-line one as T grows.
    """
    sigma_t = sigma_p_truncated(problem)
    if not (np.isfinite(sigma_t) and sigma_t > 0.0):
        raise OracleFailure("truncated criterion constant is not finite and positive")
    lo = 1.0 / (problem.exponent.k_p * sigma_t)
    hi = 1.0 / sigma_t
    iterations = 0

    expansions = 0
    while _past_principal(problem, shoot_once(problem, lo, rtol=rtol, atol=atol)):
        lo /= 2.0
        expansions += 1
        iterations += 1
        if expansions > 2:
            raise OracleFailure("lower bracket end keeps overshooting the principal eigenvalue")
    expansions = 0
    while not _past_principal(problem, shoot_once(problem, hi, rtol=rtol, atol=atol)):
        hi *= 2.0
        expansions += 1
        iterations += 1
        if expansions > 2:
            raise OracleFailure("upper bracket end does not reach the principal eigenvalue")

    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        iterations += 1
        if _past_principal(problem, shoot_once(problem, mid, rtol=rtol, atol=atol)):
            hi = mid
        else:
            lo = mid

    # secant polish on the smooth boundary functional near the root
    def functional(lam):
        shot = shoot_once(problem, lam, rtol=rtol, atol=atol)
        return shot.g_end if problem.boundary is BoundaryCase.ND else shot.w_end

    la, lb = lo, hi
    fa, fb = functional(la), functional(lb)
    iterations += 2
    lam = lb if abs(fb) < abs(fa) else la
    for _ in range(3):
        if fb == fa:
            break
        cand = lb - fb * (lb - la) / (fb - fa)
        if not (min(la, lb) <= cand <= max(la, lb)):
            break
        la, fa, lb, fb = lb, fb, cand, functional(cand)
        iterations += 1
        lam = lb

    grid = np.linspace(0.0, problem.truncation, n_samples)
    final = shoot_once(problem, lam, sample_points=grid, rtol=rtol, atol=atol)
    iterations += 1
    if final.sign_changes > 0:
        raise OracleFailure("converged solution is not principal (interior sign change)")

    xs = np.concatenate(([0.0], final.xs))
    x0, y0 = _start_state(problem, lam)
    g_vals = np.concatenate(([1.0 if problem.boundary is BoundaryCase.ND else 0.0], final.g))
    w_vals = np.concatenate(([0.0 if problem.boundary is BoundaryCase.ND else 1.0], final.w))
    keep = np.concatenate(([True], np.diff(xs) > 0.0))
    g_fn = GridFunction(xs[keep], g_vals[keep])
    w_fn = GridFunction(xs[keep], w_vals[keep])
    residual = abs(final.g_end) if problem.boundary is BoundaryCase.ND else abs(final.w_end)
    scale = float(np.max(np.abs(g_fn.values))) or 1.0
    return ShootResult(
        lam=float(lam),
        g=g_fn,
        w=w_fn,
        iterations=iterations,
        residual=residual / scale,
        truncated=not np.isfinite(problem.D),
    )
