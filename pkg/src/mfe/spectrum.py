"""Linearized stability of computed states.

Three generalized eigenproblems are exposed, all sharing the grid operator
A (the Dirichlet difference Laplacian) and differing in the weight placed on
the right-hand side and in whether the mass-normalization coupling enters:

* ``stability_Q``   -- smallest nu of (A - mu diag(e^u)) phi = nu diag(e^u) phi,
  the linearization of the unnormalized problem at a state (u, mu);
* ``stability_P_frozen_mass`` -- smallest tau of
  (A - lam diag(delta)) phi = tau diag(delta) phi, the normalized problem with
  the density's mass response frozen;
* ``stability_P``   -- smallest tau of the full normalized linearization
  (A - lam diag(delta) + lam delta d^T) phi = tau diag(delta) phi with
  d = w * delta, whose rank-one term is the derivative of the normalization.

Multiplying any of these pencils by the quadrature weights on the left shows
the eigenvalue equals the weighted Rayleigh quotient of the corresponding
quadratic form, so the lower bounds nu > -mu and tau > -lam hold and a shift
one unit below is always safe for the shift-inverted power iteration.

Eigenfields are normalized so the weighted square against the pencil's own
density integrates to one, with the largest-magnitude entry positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .solver.functionals import delta_of, mass_integral, safe_exp
from .solver.linalg import shift_invert_smallest

__all__ = [
    "EigenResult",
    "stability_Q",
    "stability_P_frozen_mass",
    "stability_P",
    "spectrum_at",
]


@dataclass
class EigenResult:
    value: float
    field: np.ndarray
    iterations: int
    residual: float


def _finalize(grid, theta, phi, its, res, weight) -> EigenResult:
    phi = phi / math.sqrt(grid.w @ (weight * phi * phi))
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    return EigenResult(float(theta), phi, its, float(res))


def stability_Q(grid, u, mu: float, tol: float = 1e-10, x0=None) -> EigenResult:
    """Smallest eigenvalue of the linearization at a state of the
    unnormalized problem: (A - mu diag(e^u)) phi = nu diag(e^u) phi."""
    e = safe_exp(u)
    M = grid.A - sparse.diags(mu * e)
    theta, phi, its, res = shift_invert_smallest(
        M, e, -mu - 1.0, tol=tol, x0=x0)
    return _finalize(grid, theta, phi, its, res, e)


def stability_P_frozen_mass(grid, u, lam: float, tol: float = 1e-10,
                            x0=None) -> EigenResult:
    """Smallest eigenvalue of (A - lam diag(delta)) phi = tau diag(delta) phi:
    the normalized-problem linearization without the mass-response term."""
    delta = delta_of(grid, u)
    M = grid.A - sparse.diags(lam * delta)
    theta, phi, its, res = shift_invert_smallest(
        M, delta, -lam - 1.0, tol=tol, x0=x0)
    return _finalize(grid, theta, phi, its, res, delta)


def stability_P(grid, u, lam: float, tol: float = 1e-10, x0=None) -> EigenResult:
    """Smallest eigenvalue of the full normalized linearization

        (A - lam diag(delta) + lam delta d^T) phi = tau diag(delta) phi

    with d = w * delta.  The rank-one term adds lam (int delta phi)^2 >= 0
    to the quadratic form, so this eigenvalue dominates the frozen-mass one.
    """
    delta = delta_of(grid, u)
    M = grid.A - sparse.diags(lam * delta)
    rank_one = (lam * delta, grid.w * delta)
    theta, phi, its, res = shift_invert_smallest(
        M, delta, -lam - 1.0, rank_one=rank_one, tol=tol, x0=x0)
    return _finalize(grid, theta, phi, its, res, delta)


def spectrum_at(grid, u, lam: float | None = None, mu: float | None = None,
                tol: float = 1e-10) -> dict:
    """All three leading eigenvalues at a state, keyed as in report files.

    Either lam or mu may be omitted; the other is recovered through the
    mass integral of u.
    """
    I = mass_integral(grid, u)
    if lam is None and mu is None:
        raise ValueError("provide lam or mu")
    if mu is None:
        mu = lam / I
    if lam is None:
        lam = mu * I
    frozen = stability_P_frozen_mass(grid, u, lam, tol=tol)
    full = stability_P(grid, u, lam, tol=tol, x0=frozen.field)
    # the unnormalized pencil shares eigenvectors with the frozen-mass one
    # (the weights differ by the constant mass factor), so seed it there too
    nu = stability_Q(grid, u, mu, tol=tol, x0=frozen.field)
    return {"tau1": full.value, "tau0": frozen.value, "nu0": nu.value}
