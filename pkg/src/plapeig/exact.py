"""Closed-form reference values for Lebesgue weights on the unit
interval -- the test anchor every generic module is checked against."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ExactValues", "exact_eigenvalue", "exact_sigma", "exact_delta_rayleigh", "exact_values"]


def _check_p(p: float):
    if p <= 1.0:
        raise ValueError(f"closed forms require p > 1, got {p}")


def exact_eigenvalue(p: float) -> float:
    """lambda = [pi (p-1)^(1/p) / (p sin(pi/p))]^p."""
    _check_p(p)
    return (np.pi * (p - 1.0) ** (1.0 / p) / (p * np.sin(np.pi / p))) ** p


def exact_sigma(p: float) -> float:
    """sigma = [(1/p)^(1/p) (1/p*)^(1/p*)]^p = (1/p)(1/p*)^(p-1).

    Note k(p) * sigma = 1 on the unit interval, for every p."""
    _check_p(p)
    ps = p / (p - 1.0)
    return ((1.0 / p) ** (1.0 / p) * (1.0 / ps) ** (1.0 / ps)) ** p


def exact_delta_rayleigh(p: float) -> float:
    """First Rayleigh value: [p^(1/p - 2) (p^2 - 1)^(1 - 1/p)]^p."""
    _check_p(p)
    return (p ** (1.0 / p - 2.0) * (p * p - 1.0) ** (1.0 - 1.0 / p)) ** p


@dataclass(frozen=True)
class ExactValues:
    """The three displayed closed forms, in eigenvalue-root scale."""

    p: float
    lambda_root: float
    sigma_root: float
    delta_rayleigh_root: float


def exact_values(p: float) -> ExactValues:
    return ExactValues(
        p=p,
        lambda_root=exact_eigenvalue(p) ** (1.0 / p),
        sigma_root=exact_sigma(p) ** (1.0 / p),
        delta_rayleigh_root=exact_delta_rayleigh(p) ** (1.0 / p),
    )
