"""Certified minimax polynomial approximation on [-1, 1].

Computes best uniform approximation errors by polynomials of degree <= n,
both unconstrained (Remez exchange) and restricted to convex polynomials
(cutting planes over a dense LP), each with a certified two-sided bracket,
plus the scaled sequences n**lam * E_n and their limit extrapolation.
"""

from .cheb import ChebPoly, DomainError, ZeroPolynomialError, min_on_domain, roots_in_domain
from .convex_sip import (
    ConvexApproxResult,
    ConvexSolveError,
    best_convex_approx,
    en_convex_value,
    remez_convexity_slack,
)
from .limits import (
    ExtrapolationReport,
    LsBoundViolation,
    SequenceRow,
    SequenceTable,
    boundedness_report,
    build_sequence,
    extrapolate_limit,
    ls_inequality_check,
    oq2_scaled_error,
)
from .lp import LPError, LPProblem, LPSolution, solve_lp
from .precision import (
    Scalar,
    format_scalar,
    get_precision,
    set_precision,
    to_scalar,
    working_precision,
)
from .remez import ApproxResult, Reference, RemezError, best_approx, en_value
from .store import ConfigError, RunConfig, SOLVER_VERSION
from .targets import TargetSpec, abs_pow, eval_target, exp_fn, is_convex, second_derivative_target

__version__ = "0.1.0"

__all__ = [
    "ApproxResult",
    "ChebPoly",
    "ConfigError",
    "ConvexApproxResult",
    "ConvexSolveError",
    "DomainError",
    "ExtrapolationReport",
    "LPError",
    "LPProblem",
    "LPSolution",
    "LsBoundViolation",
    "Reference",
    "RemezError",
    "RunConfig",
    "SOLVER_VERSION",
    "Scalar",
    "SequenceRow",
    "SequenceTable",
    "TargetSpec",
    "ZeroPolynomialError",
    "abs_pow",
    "best_approx",
    "best_convex_approx",
    "boundedness_report",
    "build_sequence",
    "en_convex_value",
    "en_value",
    "eval_target",
    "exp_fn",
    "extrapolate_limit",
    "format_scalar",
    "get_precision",
    "is_convex",
    "ls_inequality_check",
    "min_on_domain",
    "oq2_scaled_error",
    "remez_convexity_slack",
    "roots_in_domain",
    "second_derivative_target",
    "set_precision",
    "solve_lp",
    "to_scalar",
    "working_precision",
    "__version__",
]
