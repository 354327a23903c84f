"""Thin-domain expansion checks against solved states.

The reduced description of the thin canonical ellipse replaces the field by
alpha-scaled profiles: u ~ alpha*phi0 + alpha^2*phi1 with phi0 = mu0*psi0,
psi0 the torsion profile, and phi1 solving -Lap phi1 = mu0^2 psi0.  The
routines here compute those correction fields discretely, compare solved
states against the truncated expansion, and expose the reduced-parameter
maps both ways (solver -> series residuals are the acceptance quantities).
"""

from __future__ import annotations

import math

import numpy as np

from .. import closedform
from ..solver.functionals import mass_integral
from ..solver.linalg import linear_solver
from ..solver.newton import newton_Q

__all__ = [
    "reduced_parameter",
    "lambda_from_reduced",
    "correction_field",
    "verify_expansion",
]


def _alpha_of(grid) -> float:
    alpha = float(getattr(grid.domain, "alpha", math.nan))
    if math.isnan(alpha):
        raise ValueError("expansion checks need a canonical-ellipse grid")
    return alpha


def reduced_parameter(grid, u, lam: float) -> float:
    """mu0 recovered from a solved state: lam / (alpha * int e^u)."""
    return lam / (_alpha_of(grid) * mass_integral(grid, u))


def lambda_from_reduced(grid, mu0: float):
    """Solve the unnormalized problem at mu = alpha*mu0 and return the
    carried mass (the solver-side counterpart of the two-term series
    pi*mu0 + pi*mu0^2*alpha/4)."""
    alpha = _alpha_of(grid)
    sol, _ = newton_Q(grid, alpha * mu0)
    return float(sol.mu * mass_integral(grid, sol.u)), sol


def correction_field(grid, mu0: float) -> np.ndarray:
    """phi1 from the discrete Poisson solve -Lap phi1 = mu0^2 psi0."""
    alpha = _alpha_of(grid)
    rhs = mu0 * mu0 * closedform.psi0(alpha)(grid.x, grid.y)
    return linear_solver(grid.A.tocsc())(rhs)


def verify_expansion(alpha: float, lam: float, branch) -> dict:
    """Compare a branch state at (alpha, lam) with the two-term expansion.

    Returns the sup-norm remainder r = ||u - alpha*phi0 - alpha^2*phi1||_inf,
    the reduced-parameter residual |mu0_solver - mu0_series|, the center
    amplitude u(0,0)/alpha with its predicted limit mu0/(2(1+alpha^2)), and
    the phi1 quadrature against its closed form.
    """
    grid = branch.grid
    if grid is None or abs(branch.alpha - alpha) > 1e-12:
        raise ValueError("branch was not computed on omega_alpha")
    lams = branch.column("lam")
    k = int(np.argmin(np.abs(lams - lam)))
    if abs(lams[k] - lam) > 1e-6 * (1.0 + lam):
        raise ValueError(f"no branch point at lam={lam:.6g}")
    pt = branch.points[k]

    mu0 = closedform.mu0_series(lam, alpha)[0]
    phi0 = mu0 * closedform.psi0(alpha)(grid.x, grid.y)
    phi1 = correction_field(grid, mu0)
    r = float(np.max(np.abs(pt.u - alpha * phi0 - alpha * alpha * phi1)))

    mu0_solver = reduced_parameter(grid, pt.u, pt.lam)
    center = grid.interp(pt.u, 0.0, 0.0) / alpha
    phi1_integral = alpha * alpha * float(grid.w @ phi1)
    phi1_exact = closedform.phi1_integral(mu0, alpha)
    return {
        "r": r,
        "mu0_solver": mu0_solver,
        "mu0_series": mu0,
        "mu0_residual": abs(mu0_solver - mu0),
        "center_over_alpha": center,
        "center_predicted": mu0 / (2.0 * (1.0 + alpha * alpha)),
        "phi1_integral": phi1_integral,
        "phi1_integral_exact": phi1_exact,
    }
