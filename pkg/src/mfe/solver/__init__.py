"""Discrete solvers and functionals for the two problem forms."""

from .functionals import (
    F_lambda,
    delta_of,
    dirichlet_eig1,
    energy,
    entropy,
    free_energy_cvp,
    lambda_of,
    mass_integral,
    safe_exp,
)
from .linalg import linear_solver, shift_invert_smallest
from .monotone import monotone_iterate
from .newton import Solution, SolveReport, newton_P, newton_P_deflated, newton_Q

__all__ = [
    "F_lambda",
    "delta_of",
    "dirichlet_eig1",
    "energy",
    "entropy",
    "free_energy_cvp",
    "lambda_of",
    "mass_integral",
    "safe_exp",
    "linear_solver",
    "shift_invert_smallest",
    "monotone_iterate",
    "Solution",
    "SolveReport",
    "newton_P",
    "newton_P_deflated",
    "newton_Q",
]
