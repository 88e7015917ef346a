"""Weight functions: named built-ins plus parsed expression trees.

Built-ins (constant, exponential rate, power) carry analytic
derivatives; expression weights fall back to a centered difference with
step ``1e-6 * (1 + |x|)``.  Weights must be strictly positive and finite
on the open interior of the domain -- enforced when a problem is
constructed, not here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expressions import Expression, parse_expression

__all__ = ["WeightFn", "parse_weight"]


@dataclass(frozen=True)
class WeightFn:
    """Positive weight on (0, D): one of the built-in families or an
    arbitrary parsed expression in x."""

    kind: str
    params: tuple = ()
    expression: Expression | None = field(default=None, compare=False)

    @classmethod
    def constant(cls, value: float) -> "WeightFn":
        return cls(kind="constant", params=(float(value),))

    @classmethod
    def exponential(cls, rate: float) -> "WeightFn":
        """exp(rate * x)"""
        return cls(kind="exponential", params=(float(rate),))

    @classmethod
    def power(cls, exponent: float) -> "WeightFn":
        """x ** exponent"""
        return cls(kind="power", params=(float(exponent),))

    @classmethod
    def from_expression(cls, text: str) -> "WeightFn":
        return cls(kind="expression", expression=parse_expression(text))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            out = np.full_like(x, self.params[0]) if x.ndim else self.params[0]
            return out
        if self.kind == "exponential":
            return np.exp(self.params[0] * x)
        if self.kind == "power":
            return x ** self.params[0]
        if self.kind == "expression":
            return self.expression(x)
        raise ValueError(f"unknown weight kind {self.kind!r}")

    def pow_eval(self, x, exponent: float):
        """self(x) ** exponent, computed without intermediate overflow
        for the built-in families (exp(50x)**-1 must not hit inf)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            val = self.params[0] ** exponent
            return np.full_like(x, val) if x.ndim else val
        if self.kind == "exponential":
            return np.exp(self.params[0] * exponent * x)
        if self.kind == "power":
            return x ** (self.params[0] * exponent)
        return self(x) ** exponent

    @property
    def analytic_derivative(self) -> bool:
        return self.kind in ("constant", "exponential", "power")

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(x) if x.ndim else 0.0
        if self.kind == "exponential":
            rate = self.params[0]
            return rate * np.exp(rate * x)
        if self.kind == "power":
            a = self.params[0]
            return a * x ** (a - 1.0)
        # centered difference for expression weights
        h = 1e-6 * (1.0 + np.abs(x))
        return (self(x + h) - self(x - h)) / (2.0 * h)

    def describe(self) -> str:
        if self.kind == "constant":
            return f"{self.params[0]:g}"
        if self.kind == "exponential":
            return f"exp({self.params[0]:g}*x)"
        if self.kind == "power":
            return f"x^{self.params[0]:g}"
        return self.expression.text


def parse_weight(text: str) -> WeightFn:
    """CLI entry: a bare number is a constant weight, anything else is
    parsed as an expression in x."""
    text = text.strip()
    try:
        return WeightFn.constant(float(text))
    except ValueError:
        return WeightFn.from_expression(text)
