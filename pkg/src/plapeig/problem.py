"""Problem definition: weights, derived measures, exponent bookkeeping,
boundary-case tagging, and the master integration grid.

A :class:`Problem` is immutable after construction and safe to share
across workers.  Construction precomputes monotone cumulative tables for
the base measure (density u) and the dual measure (density
``v**(1 - p*)``) on a clustered master grid; all interval mass queries
interpolate those tables, because the integral operators downstream
evaluate them thousands of times.

Infinite right endpoints are truncated at a point T chosen so that the
neglected dual-measure tail (reflecting case) or base-measure tail
(absorbing case) is below ``tail_tol`` relative to its total; the exact
tails beyond T are kept as explicit correction terms so that criterion
quantities retain their infinite values when the tails diverge.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import PchipInterpolator

from .quadrature import (
    DEFAULT_CONFIG,
    QuadConfig,
    QuadratureError,
    integrate,
    integrate_to_infinity,
    integrate_with_endpoint_check,
)
from .weights import WeightFn

__all__ = ["BoundaryCase", "Exponent", "Problem", "conjugate", "odd_power"]


def conjugate(p: float) -> float:
    """Conjugate exponent p/(p-1); an involution with fixed point 2."""
    if p <= 1.0:
        raise ValueError(f"conjugate exponent requires p > 1, got {p}")
    return p / (p - 1.0)


def odd_power(s, p: float):
    """The odd power nonlinearity |s|**(p-2) * s with 0 mapped to 0.

    For p < 2 the exponent is negative; magnitudes below 1e-300 return 0
    instead of overflowing.
    """
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros_like(arr)
    nz = np.abs(arr) > 1e-300
    out[nz] = np.abs(arr[nz]) ** (p - 2.0) * arr[nz]
    if np.ndim(s) == 0:
        return float(out[0])
    return out


@dataclass(frozen=True)
class Exponent:
    """p, its conjugate, and the universal two-sided estimate constant
    k(p) = p * p_star**(p-1)."""

    p: float
    p_star: float
    k_p: float

    @classmethod
    def from_p(cls, p: float) -> "Exponent":
        p = float(p)
        p_star = conjugate(p)
        return cls(p=p, p_star=p_star, k_p=p * p_star ** (p - 1.0))

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError("p must exceed 1")
        if abs(1.0 / self.p + 1.0 / self.p_star - 1.0) > 1e-12:
            raise ValueError("p_star is not the conjugate of p")


class BoundaryCase(enum.Enum):
    """Boundary codes: reflecting (Neumann) at 0 with absorbing
    (Dirichlet) at D, or the mirror arrangement."""

    ND = "nd"
    DN = "dn"

    @classmethod
    def coerce(cls, value) -> "BoundaryCase":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _unit_rule(n):
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


_TAU, _WQ = _unit_rule(7)
_TAU4, _WQ4 = _unit_rule(4)


def _partial_matrix(tau):
    """M[j, k] = integral over [0, tau_j] of the k-th Lagrange basis
    polynomial on nodes tau (so cumulative integrals of a sampled
    integrand are one matrix product per cell)."""
    n = len(tau)
    V = np.vander(tau, n, increasing=True)
    C = np.linalg.inv(V)  # column k: monomial coefficients of basis poly k
    powers = np.arange(1, n + 1, dtype=float)
    T = tau[:, None] ** powers[None, :] / powers[None, :]
    return T @ C


_M_LEFT = _partial_matrix(_TAU)          # integral from cell start to node j
_M_RIGHT = _WQ[None, :] - _M_LEFT        # integral from node j to cell end


def master_grid(T: float, grid_n: int = 2048, edge_frac: float = 1e-8) -> np.ndarray:
    """Uniform backbone plus geometric clustering into both endpoints."""
    from .search import clustered_nodes

    return clustered_nodes(
        0.0,
        T,
        n_uniform=grid_n // 2 + 1,
        n_edge=max(grid_n // 4, 8),
        edge_frac=edge_frac,
    )


class _CumTable:
    """Monotone cumulative table of a nonnegative density over the master
    grid, with divergence allowed only in the two extreme cells."""

    def __init__(self, nodes, cell_masses, density, quad):
        self.nodes = nodes
        self.density = density
        self.quad = quad
        self.head_inf = not np.isfinite(cell_masses[0])
        self.tail_inf = not np.isfinite(cell_masses[-1])
        interior = cell_masses[1:-1]
        if not np.all(np.isfinite(interior)):
            raise ValueError(
                "density is not locally integrable on the interior "
                "(an interior cell integral diverged)"
            )
        n0 = 1 if self.head_inf else 0
        n1 = len(nodes) - 2 if self.tail_inf else len(nodes) - 1
        self.n0, self.n1 = n0, n1
        finite = cell_masses[n0 : n1]
        cum = np.concatenate(([0.0], np.cumsum(finite)))
        self._origin = nodes[n0]
        self._end = nodes[n1]
        self.finite_total = float(cum[-1])
        self._interp = PchipInterpolator(nodes[n0 : n1 + 1], cum, extrapolate=False)

    def _cum(self, x):
        """Cumulative mass from the finite origin, vectorized."""
        x = np.clip(np.asarray(x, dtype=float), self._origin, self._end)
        return self._interp(x)

    def between(self, a: float, b: float) -> float:
        """Mass of [a, b] within [0, T]; +inf when a divergent extreme
        cell is fully covered."""
        if a > b:
            raise ValueError(f"interval out of order: {a} > {b}")
        if a == b:
            return 0.0
        T = self.nodes[-1]
        if self.head_inf and a <= 0.0:
            return np.inf
        if self.tail_inf and b >= T:
            return np.inf
        head = 0.0
        if a < self._origin:  # only when the head cell diverged at 0
            head = integrate(self.density, a, self._origin, self.quad)
            a = self._origin
        tail = 0.0
        if b > self._end:  # only when the tail cell diverged at T
            tail = integrate(self.density, self._end, b, self.quad)
            b = self._end
        return head + tail + float(self._cum(b) - self._cum(a))


class Problem:
    """Full input specification: weights u and v, right endpoint D
    (finite or inf), exponent p, and the boundary case.

    Derived accessors expose the base measure ``mu`` (density u) and the
    dual measure ``nu_hat`` (density ``v**(1-p*)``) as interval masses,
    with +inf a legal answer when the mass diverges.
    """

    def __init__(
        self,
        u,
        v,
        D: float = 1.0,
        p: float = 2.0,
        boundary="nd",
        truncation: float | None = None,
        grid_n: int = 2048,
        tail_tol: float = 1e-10,
        quad: QuadConfig | None = None,
        edge_frac: float = 1e-8,
    ):
        self.u = WeightFn.constant(u) if isinstance(u, (int, float)) else u
        self.v = WeightFn.constant(v) if isinstance(v, (int, float)) else v
        self.exponent = Exponent.from_p(p)
        self.boundary = BoundaryCase.coerce(boundary)
        self.D = float(D)
        if not self.D > 0.0:
            raise ValueError("D must be positive")
        self.quad = quad if quad is not None else DEFAULT_CONFIG
        self.tail_tol = float(tail_tol)

        if np.isfinite(self.D):
            if truncation is not None and truncation != self.D:
                raise ValueError("truncation must equal D when D is finite")
            self.truncation = self.D
        elif truncation is not None:
            if not (np.isfinite(truncation) and truncation > 0.0):
                raise ValueError("explicit truncation must be finite and positive")
            self.truncation = float(truncation)
        else:
            self.truncation = self._choose_truncation()

        T = self.truncation
        self.grid = master_grid(T, grid_n=grid_n, edge_frac=edge_frac)
        self._H = np.diff(self.grid)
        self._S = self.grid[:-1, None] + self._H[:, None] * _TAU[None, :]
        self._S4 = self.grid[:-1, None] + self._H[:, None] * _TAU4[None, :]

        self._U_S = np.asarray(self.u(self._S), dtype=float)
        self._V_S = np.asarray(self.v(self._S), dtype=float)
        self._check_positive(self._U_S, "u")
        self._check_positive(self._V_S, "v")
        self._VHAT_S = self.v.pow_eval(self._S, 1.0 - self.exponent.p_star)

        self._mu_table = self._build_table(self.u)
        self._nu_table = self._build_table(self.v_hat)

        if np.isfinite(self.D):
            self.mu_tail = 0.0
            self.nu_tail = 0.0
        else:
            self.mu_tail = integrate_to_infinity(self.u, T, self.quad)
            self.nu_tail = integrate_to_infinity(self.v_hat, T, self.quad)

    # -- construction helpers -------------------------------------------------

    def _check_positive(self, samples, name):
        if not np.all(np.isfinite(samples)) or np.any(samples <= 0.0):
            raise ValueError(
                f"weight {name} must be strictly positive and finite on the "
                f"interior of (0, {self.truncation:g})"
            )

    def _choose_truncation(self) -> float:
        """Doubling search for the smallest T with a controlled neglected
        tail; falls back to 64 when the controlling mass diverges (the
        eigenvalue is then 0 and T only matters for truncated studies)."""
        density = self.v_hat if self.boundary is BoundaryCase.ND else self.u
        total = integrate_to_infinity(density, 0.0, self.quad)
        if not np.isfinite(total):
            return 64.0
        T = 1.0
        for _ in range(41):
            tail = integrate_to_infinity(density, T, self.quad)
            if tail <= self.tail_tol * total:
                return T
            T *= 2.0
        return T

    def _build_table(self, density) -> _CumTable:
        F7 = np.asarray(density(self._S), dtype=float)
        F4 = np.asarray(density(self._S4), dtype=float)
        with np.errstate(invalid="ignore"):
            c7 = self._H * (F7 @ _WQ)
            c4 = self._H * (F4 @ _WQ4)
        est = np.abs(c7 - c4)
        total = float(np.sum(np.abs(c7[np.isfinite(c7)])))
        thresh = max(self.quad.abs_tol, 0.5 * self.quad.rel_tol * max(total, 1e-300) / len(c7))
        bad = np.nonzero((est > thresh) | ~np.isfinite(c7))[0]
        cell_cfg = QuadConfig(
            rel_tol=self.quad.rel_tol,
            abs_tol=max(thresh, 1e-300),
            max_depth=self.quad.max_depth,
            divergence_factor=self.quad.divergence_factor,
            divergence_streak=self.quad.divergence_streak,
        )
        n_cells = len(c7)
        for i in bad:
            a, b = self.grid[i], self.grid[i + 1]
            try:
                c7[i] = integrate(density, a, b, cell_cfg)
            except QuadratureError:
                if i == 0:
                    c7[i] = integrate_with_endpoint_check(density, a, b, "left", cell_cfg)
                elif i == n_cells - 1:
                    c7[i] = integrate_with_endpoint_check(density, a, b, "right", cell_cfg)
                else:
                    raise ValueError(
                        f"density not integrable on interior cell [{a:g}, {b:g}]"
                    )
        return _CumTable(self.grid, c7, density, self.quad)

    # -- derived densities and measures ---------------------------------------

    @property
    def p(self) -> float:
        return self.exponent.p

    @property
    def p_star(self) -> float:
        return self.exponent.p_star

    def v_hat(self, x):
        """Dual weight v**(1 - p*)."""
        return self.v.pow_eval(x, 1.0 - self.exponent.p_star)

    def _measure(self, table, tail, a: float, b: float) -> float:
        if a < -1e-12 or (np.isfinite(self.D) and b > self.D * (1.0 + 1e-12) + 1e-300):
            raise ValueError(f"interval [{a}, {b}] outside [0, D]")
        if a > b:
            raise ValueError(f"interval out of order: {a} > {b}")
        a = max(a, 0.0)
        T = self.truncation
        if not np.isfinite(b):
            return table.between(a, T) + tail
        if b > T:  # finite query beyond the truncation of an infinite domain
            return table.between(a, T) + integrate(table.density, T, b, self.quad)
        return table.between(a, min(b, T))

    def mu(self, a: float, b: float) -> float:
        """Base-measure mass of [a, b] (density u); +inf on divergence."""
        return self._measure(self._mu_table, self.mu_tail, a, b)

    def nu_hat(self, a: float, b: float) -> float:
        """Dual-measure mass of [a, b] (density v**(1-p*)); +inf on divergence."""
        return self._measure(self._nu_table, self.nu_tail, a, b)

    # -- vectorized fast paths used by the bound evaluators --------------------

    def mu_left(self, x):
        """mu(0, x) vectorized over interior points."""
        if self._mu_table.head_inf:
            return np.where(np.asarray(x, dtype=float) > 0.0, np.inf, 0.0)
        return self._mu_table._cum(x)

    def mu_right(self, x):
        """mu(x, D) vectorized."""
        base = self._mu_table.finite_total - self._mu_table._cum(x)
        if self._mu_table.tail_inf or not np.isfinite(self.mu_tail):
            return np.full_like(np.asarray(x, dtype=float), np.inf)
        return base + self.mu_tail

    def nu_hat_left(self, x):
        """nu_hat(0, x) vectorized."""
        if self._nu_table.head_inf:
            return np.where(np.asarray(x, dtype=float) > 0.0, np.inf, 0.0)
        return self._nu_table._cum(x)

    def nu_hat_right(self, x):
        """nu_hat(x, D) vectorized."""
        base = self._nu_table.finite_total - self._nu_table._cum(x)
        if self._nu_table.tail_inf or not np.isfinite(self.nu_tail):
            return np.full_like(np.asarray(x, dtype=float), np.inf)
        return base + self.nu_tail

    # -- cumulative tables of derived integrands -------------------------------

    def cumulative(self, fn, backward: bool = False, tail_init: float = 0.0):
        """Cumulative table of a derived integrand over the master grid.

        Forward tables hold integral from 0 to node; backward tables hold
        integral from node to T plus ``tail_init``.  Returns (node values,
        pchip interpolant).  Raises QuadratureError if a cell diverges.
        """
        F7 = np.asarray(fn(self._S), dtype=float)
        F4 = np.asarray(fn(self._S4), dtype=float)
        c7 = self._H * (F7 @ _WQ)
        c4 = self._H * (F4 @ _WQ4)
        est = np.abs(c7 - c4)
        total = float(np.sum(np.abs(c7[np.isfinite(c7)])))
        thresh = max(self.quad.abs_tol, 0.5 * self.quad.rel_tol * max(total, 1e-300) / len(c7))
        bad = np.nonzero((est > thresh) | ~np.isfinite(c7))[0]
        cell_cfg = QuadConfig(
            rel_tol=self.quad.rel_tol,
            abs_tol=max(thresh, 1e-300),
            max_depth=self.quad.max_depth,
        )
        for i in bad:
            c7[i] = integrate(fn, self.grid[i], self.grid[i + 1], cell_cfg)
        if backward:
            values = np.concatenate((np.cumsum(c7[::-1])[::-1], [0.0])) + tail_init
        else:
            values = np.concatenate(([0.0], np.cumsum(c7))) + tail_init
        interp = PchipInterpolator(self.grid, values, extrapolate=False)
        return values, interp

    def describe(self) -> str:
        parts = [
            f"u = {self.u.describe()}",
            f"v = {self.v.describe()}",
            f"D = {self.D:g}",
            f"p = {self.p:g}",
            f"case = {self.boundary.value}",
        ]
        if not np.isfinite(self.D):
            parts.append(f"truncation = {self.truncation:g}")
        return ", ".join(parts)
