"""Two-sided bounds and high-accuracy reference values for the
principal mixed eigenvalue of the one-dimensional weighted p-Laplacian,
equivalently the reciprocal optimal constant in the weighted Hardy
inequality on (0, D).

Both mixed boundary arrangements are supported: reflecting at 0 with
absorbing at D ("nd") and the mirror ("dn").
"""

from .bounds import (
    BoundsReport,
    basic_bounds,
    bounds_report,
    delta_lower,
    delta_rayleigh,
    delta_upper,
    sigma_p,
)
from .exact import ExactValues, exact_delta_rayleigh, exact_eigenvalue, exact_sigma, exact_values
from .expressions import ExpressionError, parse_expression
from .gridfun import ClassCheck, ClassTag, GridFunction, OperatorKind
from .iterate import (
    AscendingState,
    IterationError,
    IterationState,
    ascending_sequence,
    descending_sequence,
    rayleigh_value,
)
from .operators import (
    ClassViolationError,
    DirectedBound,
    bound_from_test_function,
    differential_op,
    double_integral_op,
    double_integral_values,
    single_integral_op,
    validate_class,
)
from .problem import BoundaryCase, Exponent, Problem, conjugate, odd_power
from .quadrature import QuadConfig, QuadratureError, integrate, integrate_to_infinity
from .shooting import OracleFailure, ShootResult, shoot_once, solve_eigenvalue
from .sweep import CSV_COLUMNS, SweepRow, row_ordering_ok, run_sweep, write_csv
from .weights import WeightFn, parse_weight

__version__ = "0.1.0"

__all__ = [
    "BoundaryCase",
    "BoundsReport",
    "ClassCheck",
    "ClassTag",
    "ClassViolationError",
    "CSV_COLUMNS",
    "DirectedBound",
    "ExactValues",
    "Exponent",
    "ExpressionError",
    "GridFunction",
    "IterationError",
    "IterationState",
    "AscendingState",
    "OperatorKind",
    "OracleFailure",
    "Problem",
    "QuadConfig",
    "QuadratureError",
    "ShootResult",
    "SweepRow",
    "WeightFn",
    "ascending_sequence",
    "basic_bounds",
    "bound_from_test_function",
    "bounds_report",
    "conjugate",
    "delta_lower",
    "delta_rayleigh",
    "delta_upper",
    "descending_sequence",
    "differential_op",
    "double_integral_op",
    "double_integral_values",
    "exact_delta_rayleigh",
    "exact_eigenvalue",
    "exact_sigma",
    "exact_values",
    "integrate",
    "integrate_to_infinity",
    "odd_power",
    "parse_expression",
    "parse_weight",
    "rayleigh_value",
    "row_ordering_ok",
    "run_sweep",
    "shoot_once",
    "sigma_p",
    "single_integral_op",
    "solve_eigenvalue",
    "validate_class",
    "write_csv",
]
