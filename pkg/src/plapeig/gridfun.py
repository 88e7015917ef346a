"""Test functions sampled on a nonuniform grid with piecewise-linear
interpolation, plus the tags naming which operator domain a function is
meant to inhabit."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .problem import BoundaryCase

__all__ = ["GridFunction", "OperatorKind", "ClassTag", "ClassCheck"]

MIN_POINTS = 64


class OperatorKind(enum.Enum):
    """Which bound-generating operator a test function feeds."""

    SINGLE = "single"          # single integral form
    DOUBLE = "double"          # double integral form
    DIFFERENTIAL = "differential"  # differential (log-derivative) form


@dataclass(frozen=True)
class ClassTag:
    """Names the admissible class of a test function: operator kind,
    whether it is the compact-support modification used for upper
    estimates, and the boundary case it belongs to."""

    kind: OperatorKind
    modified: bool = False
    case: BoundaryCase | None = None


@dataclass
class ClassCheck:
    """validate_class verdict with human-readable violations."""

    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


class GridFunction:
    """Piecewise-linear function on a strictly increasing grid spanning
    [0, T].  The derivative is the slope of the active segment; at a
    node the right segment's slope is used (the last segment at T)."""

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if len(grid) < MIN_POINTS:
            raise ValueError(f"grid must have at least {MIN_POINTS} points")
        if not np.all(np.diff(grid) > 0.0):
            raise ValueError("grid must be strictly increasing")
        if grid[0] != 0.0:
            raise ValueError("grid must start at 0")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        self.grid = grid
        self.values = values
        self._slopes = np.diff(values) / np.diff(grid)

    @classmethod
    def from_callable(cls, fn, grid) -> "GridFunction":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(fn(grid), dtype=float))

    @property
    def span(self) -> float:
        return float(self.grid[-1])

    @property
    def slopes(self) -> np.ndarray:
        return self._slopes

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values)

    def segment_index(self, x):
        """Index of the segment whose slope defines the derivative at x."""
        idx = np.searchsorted(self.grid, np.asarray(x, dtype=float), side="right") - 1
        return np.clip(idx, 0, len(self.grid) - 2)

    def derivative(self, x):
        """A.e. derivative: slope of the active piecewise-linear segment."""
        out = self._slopes[self.segment_index(x)]
        if np.ndim(x) == 0:
            return float(out)
        return out

    def support_end(self) -> float:
        """Right end of {f > 0}: the first grid point after the last
        positive node (T when the function stays positive)."""
        pos = np.nonzero(self.values > 0.0)[0]
        if len(pos) == 0:
            return 0.0
        last = pos[-1]
        if last == len(self.grid) - 1:
            return float(self.grid[-1])
        return float(self.grid[last + 1])

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)
