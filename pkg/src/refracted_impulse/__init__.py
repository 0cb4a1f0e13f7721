"""Optimal impulse dividends for refracted Levy risk processes with Parisian ruin."""

__version__ = "0.1.0"

from .errors import DomainError, KinkError, NonConvergenceError, ValidationError
from .models import (
    BROWNIAN_BASE,
    CRAMER_LUNDBERG_BASE,
    Brownian,
    CramerLundberg,
    EconSpec,
    ProblemSpec,
    RefractionSpec,
    laplace_exponent,
    load_problem,
    phi_inverse,
    validate,
)
from .optimizer import OptimizerResult, grid_oracle, optimize, sweep, verify_optimality
from .parisian import Breakpoints, breakpoints, theta, theta_basis, theta_deriv, theta_second
from .scale import W_q, W_q_deriv, g_qpq, scale_basis, varpi, w_refracted, w_refracted_deriv
from .valuation import (
    H_surface,
    Policy,
    bound_check,
    exit_laplace,
    hjb_residual,
    value_curve,
    value_optimal,
    value_policy,
)

__all__ = [
    "__version__",
    "DomainError",
    "KinkError",
    "NonConvergenceError",
    "ValidationError",
    "BROWNIAN_BASE",
    "CRAMER_LUNDBERG_BASE",
    "Brownian",
    "CramerLundberg",
    "EconSpec",
    "ProblemSpec",
    "RefractionSpec",
    "laplace_exponent",
    "load_problem",
    "phi_inverse",
    "validate",
    "OptimizerResult",
    "grid_oracle",
    "optimize",
    "sweep",
    "verify_optimality",
    "Breakpoints",
    "breakpoints",
    "theta",
    "theta_basis",
    "theta_deriv",
    "theta_second",
    "W_q",
    "W_q_deriv",
    "g_qpq",
    "scale_basis",
    "varpi",
    "w_refracted",
    "w_refracted_deriv",
    "H_surface",
    "Policy",
    "bound_check",
    "exit_laplace",
    "hjb_residual",
    "value_curve",
    "value_optimal",
    "value_policy",
]
