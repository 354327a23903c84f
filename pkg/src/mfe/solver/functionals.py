"""Scalar functionals of discrete fields: mass, density, energy, entropy,
the free-energy pair, and the first Dirichlet eigenvalue."""

import math

import numpy as np

from .linalg import linear_solver, shift_invert_smallest

_EXP_CLIP = 350.0


def safe_exp(u):
    """exp with overflow clamp; solution fields stay far below the clip."""
    return np.exp(np.minimum(u, _EXP_CLIP))


def mass_integral(grid, u) -> float:
    """I_h(u) = quadrature of e^u."""
    return float(grid.w @ safe_exp(u))


def lambda_of(grid, u, mu: float) -> float:
    """Normalized mass lam = mu * int e^u of a Q(mu) solution."""
    return mu * mass_integral(grid, u)


def delta_of(grid, u):
    """Density e^u / int e^u, renormalized so quadrature(delta) = 1 exactly."""
    e = safe_exp(u)
    d = e / (grid.w @ e)
    return d / (grid.w @ d)


def energy(grid, u, lam: float) -> float:
    """E = (1/(2 lam)) int delta u; at lam = 0 the uniform-density limit
    (1/(2|W|^2)) int A^{-1} 1."""
    if lam > 0.0:
        return float(grid.w @ (delta_of(grid, u) * u)) / (2.0 * lam)
    g = linear_solver(grid.A.tocsc())(np.ones(grid.n))
    return float(grid.w @ g) / (2.0 * grid.domain.area**2)


def entropy(grid, delta) -> float:
    """S = -int delta log delta."""
    return -float(grid.w @ (delta * np.log(delta)))


def F_lambda(grid, u, lam: float) -> float:
    """Variational functional (1/2) u^T (W A) u - lam log int e^u.

    The Dirichlet term is evaluated in operator form (quadrature weights
    against A u), which at solutions A u = lam*delta collapses exactly to
    (lam/2) int delta u; the free-energy duality below is then an identity
    of the discretization, not an approximation.
    """
    dirichlet = 0.5 * float((grid.w * u) @ (grid.A @ u))
    return dirichlet - lam * math.log(mass_integral(grid, u))


def free_energy_cvp(grid, delta, beta: float) -> float:
    """F_beta(delta) = -S(delta)/beta + E(delta) for a normalized density;
    E(delta) = (1/2) int delta g with A g = delta."""
    if beta == 0.0:
        raise ValueError("beta must be nonzero")
    g = linear_solver(grid.A.tocsc())(np.asarray(delta, dtype=float))
    e_self = 0.5 * float(grid.w @ (delta * g))
    return -entropy(grid, delta) / beta + e_self


def dirichlet_eig1(grid, tol: float = 1e-10):
    """Smallest eigenvalue of the discrete Dirichlet Laplacian (inverse
    power iteration; the M-matrix inverse is positive, so the iteration
    converges to the principal pair).  The eigenfield is rescaled so that
    its quadrature-weighted square integrates to one."""
    val, phi, _, res = shift_invert_smallest(grid.A, np.ones(grid.n), 0.0,
                                             tol=tol)
    phi = phi / math.sqrt(grid.w @ (phi * phi))
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    return float(val), phi
