"""Degenerate one-dimensional diffusions under Ito and Stratonovich noise.

Coefficient parsing and validation, the formal drift change between the two
interpretations with a trivial-solution audit, boundary classification,
mean absorption times and Monte Carlo path simulation.
"""
from .boundary import (
    BoundaryClass, BoundaryReport, IntegralVerdict, NonDegenerateBoundaryError,
    accessibility_integral, boundary_report, classify_boundary, classify_via_integral,
)
from .coefficients import DiffusionSpec, Interpretation, ValidationReport, validate_spec
from .expr import (
    Expr, ExprDomainError, ExprSyntaxError, differentiate, eval_expr, parse_expr,
    simplify, to_string,
)
from .meantime import (
    BoundaryCondition, MeanTimeSolution, drifted_logistic_mean_time, feller_exit_time,
    logistic_mean_time, solve_mean_absorption_time,
)
from .rng import PathStream, counter_normals
from .simulate import (
    EnsembleStats, Path, bessel_closed_form, ensemble, ito_integral,
    reflected_solution, shifted_family, simulate_batch, simulate_ito,
    simulate_stratonovich, stopped_family, stratonovich_integral, verify_solution,
)
from .transform import (
    TransformReport, absorbing_state_audit, ito_to_stratonovich, stratonovich_to_ito,
)

__version__ = "0.1.0"
