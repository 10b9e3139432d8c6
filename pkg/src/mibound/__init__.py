"""Tight lower bounds on I(X;Y) for binary X over an L1 ball of joint distributions."""

__version__ = "0.1.0"

from .dist import (
    Conditional,
    InfoValue,
    JointDist,
    MarginalX,
    MarginalY,
    compose,
    conditional_y_given_x,
    marginal_x,
    marginal_y,
    mutual_information,
    relative_entropy,
    validate_joint,
    variational_distance,
)
from .solver import InnerProblem, InnerResult, SolverConfig, Status, inner_minimize
from .sweep import BoundReport, lower_bound, make_grid, qx_of_gamma, sweep
from .ci import CountsTable, epsilon_for_confidence, mi_confidence_floor

__all__ = [
    "BoundReport",
    "Conditional",
    "CountsTable",
    "InfoValue",
    "InnerProblem",
    "InnerResult",
    "JointDist",
    "MarginalX",
    "MarginalY",
    "SolverConfig",
    "Status",
    "compose",
    "conditional_y_given_x",
    "epsilon_for_confidence",
    "inner_minimize",
    "lower_bound",
    "make_grid",
    "marginal_x",
    "marginal_y",
    "mi_confidence_floor",
    "mutual_information",
    "qx_of_gamma",
    "relative_entropy",
    "sweep",
    "validate_joint",
    "variational_distance",
]
