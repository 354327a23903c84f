"""Branch continuation, expansions, entropy curves, and multiplicity."""

from .continuation import Branch, BranchPoint, continue_branch
from .entropy_curve import EntropyCurve, energy_entropy_along, entropy_curvature
from .expansion import (
    correction_field,
    lambda_from_reduced,
    reduced_parameter,
    verify_expansion,
)
from .multiplicity import (
    ProbeResult,
    concentration_fraction,
    cutoff_radius,
    mountain_pass_init,
    second_solution,
    uniqueness_probe,
)

__all__ = [
    "Branch",
    "BranchPoint",
    "continue_branch",
    "EntropyCurve",
    "energy_entropy_along",
    "entropy_curvature",
    "correction_field",
    "lambda_from_reduced",
    "reduced_parameter",
    "verify_expansion",
    "ProbeResult",
    "concentration_fraction",
    "cutoff_radius",
    "mountain_pass_init",
    "second_solution",
    "uniqueness_probe",
]
