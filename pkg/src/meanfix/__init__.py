"""Solver for the restricted nonlinear mean-value Dirichlet problem.

The averaged operator H = (I + T)/2, with T a convex combination of the
ball-mean and the ball-extremum average over admissible variable-radius
balls, is iterated on a uniform lattice until its fixed point is reached.
"""

from .geometry import Containment, Disk, Domain, Ellipse, PNormBall, TOL_GEOM
from .gridfield import (BoundaryData, GridField, build_initial, dump_field_csv,
                        modulus_estimate, sample, sample_many, sup_norm_diff)
from .operators import (BallRule, H_alpha_at, M_at, OperatorSpec, S_at,
                        T_alpha_at, make_ball_rule, sweep)
from .radius import (RadiusParams, alpha_from_p, beta_max, default_params,
                     lambda_lipschitz, lambda_max, radius_at, validate_params)
from .solver import Problem, SolveReport, residual, solve, uniqueness_probe

__all__ = [
    "BallRule", "BoundaryData", "Containment", "Disk", "Domain", "Ellipse",
    "GridField", "H_alpha_at", "M_at", "OperatorSpec", "PNormBall", "Problem",
    "RadiusParams", "S_at", "SolveReport", "T_alpha_at", "TOL_GEOM",
    "alpha_from_p", "beta_max", "build_initial", "default_params",
    "dump_field_csv", "lambda_lipschitz", "lambda_max", "make_ball_rule",
    "modulus_estimate", "radius_at", "residual", "sample", "sample_many",
    "solve", "sup_norm_diff", "sweep", "uniqueness_probe", "validate_params",
]

__version__ = "0.1.0"
