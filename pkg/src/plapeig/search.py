"""One-dimensional supremum/infimum search: clustered candidate grids
followed by golden-section refinement on the bracketing segment pair.

Grid scans alone bias a supremum downward; the golden pass recovers the
between-node maximum.  Candidate grids cluster geometrically toward both
endpoints because the optimizers of split-point products often sit near
an interval end for skewed weights.
"""

from __future__ import annotations

import numpy as np

__all__ = ["clustered_nodes", "interior_candidates", "golden_max", "refine_max", "refine_min"]

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - np.sqrt(5.0)) / 2.0


def clustered_nodes(lo, hi, n_uniform=1025, n_edge=512, edge_frac=1e-8, edge_extent=0.05):
    """Nodes on [lo, hi]: a uniform backbone plus geometric clustering
    into both endpoints, down to ``edge_frac`` of the span.

    Returns a strictly increasing array including both endpoints.
    """
    span = hi - lo
    if span <= 0.0:
        raise ValueError("empty interval")
    base = np.linspace(0.0, 1.0, n_uniform)
    left = np.geomspace(edge_frac, edge_extent, n_edge)
    right = 1.0 - left[::-1]
    rel = np.unique(np.concatenate(([0.0, 1.0], base, left, right)))
    nodes = lo + span * rel
    nodes[0], nodes[-1] = lo, hi
    # float fusion of near-identical points must keep strict monotonicity
    keep = np.concatenate(([True], np.diff(nodes) > 0.0))
    return nodes[keep]


def interior_candidates(lo, hi, n=512, edge_frac=1e-8):
    """Strictly interior candidate points for sup/inf scans on (lo, hi)."""
    nodes = clustered_nodes(lo, hi, n_uniform=max(2, n // 2), n_edge=max(2, n // 4),
                            edge_frac=edge_frac)
    return nodes[1:-1]


def golden_max(fn, a, b, iters=120):
    """Golden-section maximization of a scalar function on [a, b]."""
    x1 = a + _INVPHI2 * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if b - a <= 1e-14 * (abs(a) + abs(b) + 1e-300):
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = a + _INVPHI2 * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = fn(x2)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def refine_max(fn, xs, fs=None, iters=120):
    """Max over candidates, then golden refinement around the argmax.

    ``fn`` is evaluated pointwise; ``fs`` may carry precomputed candidate
    values (e.g. from a vectorized scan).
    """
    xs = np.asarray(xs, dtype=float)
    if fs is None:
        fs = np.array([fn(x) for x in xs])
    fs = np.asarray(fs, dtype=float)
    finite = np.isfinite(fs)
    if not finite.any():
        return xs[0], fs[0]
    masked = np.where(finite, fs, -np.inf)
    i = int(np.argmax(masked))
    lo = xs[i - 1] if i > 0 else xs[i]
    hi = xs[i + 1] if i < len(xs) - 1 else xs[i]
    if hi <= lo:
        return xs[i], fs[i]
    x_ref, f_ref = golden_max(fn, lo, hi, iters=iters)
    if f_ref >= fs[i]:
        return x_ref, f_ref
    return xs[i], fs[i]


def refine_min(fn, xs, fs=None, iters=120):
    """Min over candidates plus golden refinement (negated refine_max)."""
    fs_in = None if fs is None else -np.asarray(fs, dtype=float)
    x, f = refine_max(lambda x: -fn(x), xs, fs_in, iters=iters)
    return x, -f
