"""Adaptive Gauss-Legendre quadrature with open (interior-node) rules.

Every integral in this package runs through :func:`integrate` or
:func:`integrate_to_infinity`.  Three design constraints drive the
implementation:

* interval endpoints are never sampled, so integrable endpoint
  singularities (``x**-0.5`` and friends) and dual weights that blow up
  at an interval end are handled without special casing;
* divergence of an improper integral is a *value* (``inf``), not an
  error: the verdict comes from a window-doubling growth test, because
  downstream criteria consume "the integral is infinite" as a
  meaningful answer;
* results carry a certified tolerance: ``|result - integral| <=
  max(abs_tol, rel_tol * |result|)`` whenever the refinement terminates
  normally.

The engine is globally adaptive: panels live in a max-heap keyed by the
gap between a 7-point and a 15-point Gauss estimate, and the worst panel
is bisected until the summed error estimate meets tolerance.  Integrands
must be vectorized over numpy arrays.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "QuadConfig",
    "QuadratureError",
    "DEFAULT_CONFIG",
    "integrate",
    "integrate_to_infinity",
    "integrate_with_endpoint_check",
]


def _unit_rule(n):
    """Gauss-Legendre nodes/weights mapped from [-1, 1] to [0, 1]."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


_X7, _W7 = _unit_rule(7)
_X15, _W15 = _unit_rule(15)

_MAX_PANELS = 200_000


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and divergence policy for the adaptive engine."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 60
    divergence_factor: float = 1.01
    divergence_streak: int = 8

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_depth < 10:
            raise ValueError("max_depth must be at least 10")
        if self.divergence_factor <= 1.0:
            raise ValueError("divergence_factor must exceed 1")
        if self.divergence_streak < 1:
            raise ValueError("divergence_streak must be at least 1")


DEFAULT_CONFIG = QuadConfig()


class QuadratureError(RuntimeError):
    """Adaptive refinement could not certify the requested tolerance.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


def _panel(f, a, b):
    """15-point value and |G15 - G7| error estimate on one panel."""
    h = b - a
    fine = h * float(_W15 @ np.asarray(f(a + h * _X15), dtype=float))
    coarse = h * float(_W7 @ np.asarray(f(a + h * _X7), dtype=float))
    return fine, abs(fine - coarse)


def integrate(f, a, b, config: QuadConfig = DEFAULT_CONFIG) -> float:
    """Integrate a vectorized integrand over [a, b] to certified tolerance.

    Endpoints are never evaluated.  Raises :class:`QuadratureError` once
    the worst panel reaches ``max_depth`` bisections (the usual symptom
    of a non-integrable singularity), with the running estimate attached.
    """
    if a > b:
        raise ValueError(f"integration bounds out of order: a={a} > b={b}")
    if a == b:
        return 0.0
    val, err = _panel(f, a, b)
    if not np.isfinite(val):
        raise QuadratureError("integrand produced a non-finite sample", val, np.inf)
    heap = [(-err, 0, a, b, 0, val)]
    total, total_err = val, err
    seq = 1
    while True:
        tol = max(config.abs_tol, config.rel_tol * abs(total))
        if total_err <= tol:
            return total
        neg_err, _, pa, pb, depth, pval = heapq.heappop(heap)
        if depth >= config.max_depth:
            raise QuadratureError(
                f"max bisection depth {config.max_depth} reached on "
                f"[{pa:.6g}, {pb:.6g}] (estimate {total:.12g}, error bound {total_err:.3g})",
                total,
                total_err,
            )
        mid = 0.5 * (pa + pb)
        lval, lerr = _panel(f, pa, mid)
        rval, rerr = _panel(f, mid, pb)
        if not (np.isfinite(lval) and np.isfinite(rval)):
            raise QuadratureError(
                f"integrand produced a non-finite sample near [{pa:.6g}, {pb:.6g}]",
                total,
                np.inf,
            )
        total += lval + rval - pval
        total_err = max(total_err + lerr + rerr - (-neg_err), 0.0)
        heapq.heappush(heap, (-lerr, seq, pa, mid, depth + 1, lval))
        heapq.heappush(heap, (-rerr, seq + 1, mid, pb, depth + 1, rval))
        seq += 2
        if len(heap) > _MAX_PANELS:
            raise QuadratureError("panel budget exhausted", total, total_err)


def _growth_scan(window_values, config):
    """Divergence verdict from a sequence of cumulative window integrals.

    A streak of ``divergence_streak`` consecutive doublings where the
    cumulative integral grows by more than ``divergence_factor`` *and*
    the increments are not shrinking is declared divergent.  The
    increment condition keeps convergent heavy tails (increments decay
    geometrically) from tripping the growth test.
    """
    streak = 0
    prev_inc = None
    for j in range(1, len(window_values)):
        inc = window_values[j] - window_values[j - 1]
        grew = window_values[j] > config.divergence_factor * window_values[j - 1] > 0.0
        steady = prev_inc is None or inc >= 0.999 * prev_inc
        streak = streak + 1 if (grew and steady) else 0
        if streak >= config.divergence_streak:
            return True
        prev_inc = inc
    return False


def integrate_to_infinity(f, a, config: QuadConfig = DEFAULT_CONFIG) -> float:
    """Integrate over [a, inf), returning ``inf`` on divergence.

    Stage 1 scans window doublings [a, a + 2**j] applying the growth
    test of ``config``; once the increments become negligible the
    integral is declared convergent.  Stage 2 certifies the value via
    the substitution x = a + t/(1-t) on (0, 1).  Windows beyond ~1e19
    without a convergence verdict are reported divergent -- tails that
    heavy are not decidable at enlarged double precision anyway.

    Meant for eventually one-signed integrands (all the measures in
    this package are nonnegative).
    """
    scan_cfg = QuadConfig(
        rel_tol=max(1e-6, config.rel_tol),
        abs_tol=config.abs_tol,
        max_depth=config.max_depth,
        divergence_factor=config.divergence_factor,
        divergence_streak=config.divergence_streak,
    )
    total = integrate(f, a, a + 1.0, scan_cfg)
    windows = [total]
    length = 1.0
    converged = False
    for _ in range(64):
        inc = integrate(f, a + length, a + 2.0 * length, scan_cfg)
        total += inc
        windows.append(total)
        if _growth_scan(windows, config):
            return np.inf
        if inc <= max(config.abs_tol, 1e-3 * config.rel_tol * abs(total)):
            converged = True
            break
        length *= 2.0
    if not converged:
        return np.inf

    def substituted(t):
        t = np.asarray(t, dtype=float)
        x = a + t / (1.0 - t)
        return f(x) / (1.0 - t) ** 2

    return integrate(substituted, 0.0, 1.0, config)


def integrate_with_endpoint_check(
    f, a, b, singular_end: str, config: QuadConfig = DEFAULT_CONFIG
) -> float:
    """Integrate over [a, b] when one endpoint may be non-integrable.

    Fallback used by cumulative-table construction after plain
    :func:`integrate` hits its depth limit: windows halving toward the
    suspect endpoint feed the same growth test, and ``inf`` is returned
    on a divergence verdict.  On a convergence verdict the accumulated
    window sum is returned (accurate to the scan tolerance, which is all
    a barely-integrable endpoint permits at fixed depth).
    """
    if singular_end not in ("left", "right"):
        raise ValueError("singular_end must be 'left' or 'right'")
    if a >= b:
        return 0.0
    scan_cfg = QuadConfig(
        rel_tol=max(1e-8, config.rel_tol),
        abs_tol=config.abs_tol,
        max_depth=config.max_depth,
        divergence_factor=config.divergence_factor,
        divergence_streak=config.divergence_streak,
    )
    span = b - a
    offsets = span * 0.5 ** np.arange(1, 50)
    total = 0.0
    windows = []
    prev = span * 0.5
    if singular_end == "right":
        total = integrate(f, a, b - prev, scan_cfg)
    else:
        total = integrate(f, a + prev, b, scan_cfg)
    windows.append(total)
    for off in offsets[1:]:
        if singular_end == "right":
            inc = integrate(f, b - prev, b - off, scan_cfg)
        else:
            inc = integrate(f, a + off, a + prev, scan_cfg)
        total += inc
        windows.append(total)
        if _growth_scan(windows, config):
            return np.inf
        if inc <= max(config.abs_tol, 0.01 * config.rel_tol * abs(total)):
            return total
        prev = off
    return np.inf
