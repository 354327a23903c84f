"""Energy/entropy curves along a branch and their concavity.

Along the minimal branch both the energy E and the entropy S are smooth
functions of the mass parameter, linked pointwise by the exact identity
S = -2*lam*E + log(int e^u) (a direct consequence of log delta = u - log I).
The caloric relation dS/dE = -lam then makes the second derivative of S(E)
measurable two independent ways; the curve object stores a monotone-cubic
resampling of S onto a uniform E-lattice so the second difference is not
polluted by uneven branch steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .. import closedform
from .._log import get_logger
from ..solver.functionals import mass_integral

__all__ = ["EntropyCurve", "energy_entropy_along", "entropy_curvature"]

log = get_logger("mfe.branch")

_IDENTITY_TOL = 1e-8


@dataclass
class EntropyCurve:
    E: np.ndarray        # branch samples, strictly increasing
    S: np.ndarray
    lam: np.ndarray
    E_grid: np.ndarray   # uniform-E resampling (monotone cubic)
    S_grid: np.ndarray
    lam_grid: np.ndarray
    d2S_dE2: np.ndarray  # central second differences on the lattice (NaN ends)
    alpha: float


def energy_entropy_along(branch, n_resample: int | None = None,
                         window: bool = True) -> EntropyCurve:
    """Extract the (E, S, lam) curve from a computed branch.

    Verifies the pointwise identity S = -2*lam*E + log(int e^u) at every
    point, trims to the strictly-E-increasing range starting at the
    uniform-density end, and resamples onto a uniform E-lattice.  With
    ``window`` the upper end is capped near the thin-limit energy of the
    last stored mass (the curve's validity range); disable for branches
    far from the thin regime.
    """
    grid = branch.grid
    if grid is None or len(branch.points) == 0:
        raise ValueError("branch carries no grid/points")
    E, S, lam = [], [], []
    for p in branch.points:
        I = mass_integral(grid, p.u)
        ident = -2.0 * p.lam * p.energy + math.log(I)
        if abs(p.entropy - ident) > _IDENTITY_TOL * (1.0 + abs(p.entropy)):
            raise RuntimeError(
                f"entropy identity violated at lam={p.lam:.6g}: "
                f"S={p.entropy:.12g} vs {ident:.12g}")
        E.append(p.energy)
        S.append(p.entropy)
        lam.append(p.lam)
    E, S, lam = map(np.asarray, (E, S, lam))

    # keep the strictly-increasing-E range from the uniform-density end up
    # to the thin-regime cap (generously slackened: the cap itself is only
    # an O(alpha^3) series)
    n_keep = 1
    while n_keep < len(E) and E[n_keep] > E[n_keep - 1]:
        n_keep += 1
    if n_keep < len(E):
        log.info("entropy curve: trimmed %d non-monotone tail points",
                 len(E) - n_keep)
    E, S, lam = E[:n_keep], S[:n_keep], lam[:n_keep]
    if window and not math.isnan(branch.alpha):
        cap = closedform.E_hat_series(float(lam[-1]), branch.alpha)[0]
        span = max(E[-1] - E[0], 1e-300)
        keep = E <= cap + 0.05 * span + branch.alpha ** 3
        E, S, lam = E[keep], S[keep], lam[keep]

    n = len(E) if n_resample is None else int(n_resample)
    n = max(n, len(E))
    if len(E) >= 3:
        fS = PchipInterpolator(E, S)
        fl = PchipInterpolator(E, lam)
        Eu = np.linspace(E[0], E[-1], n)
        Su = fS(Eu)
        lu = fl(Eu)
        h = Eu[1] - Eu[0]
        d2 = np.full(n, math.nan)
        d2[1:-1] = (Su[2:] - 2.0 * Su[1:-1] + Su[:-2]) / (h * h)
    else:
        Eu, Su, lu = E.copy(), S.copy(), lam.copy()
        d2 = np.full(len(E), math.nan)
    return EntropyCurve(E, S, lam, Eu, Su, lu, d2, branch.alpha)


def entropy_curvature(curve: EntropyCurve) -> float:
    """Finite-difference d^2S/dE^2 at the midpoint of the uniform lattice."""
    if len(curve.E) < 7:
        raise ValueError("need at least 7 curve points")
    if np.any(np.diff(curve.E) <= 0):
        raise ValueError("E must be strictly increasing")
    mid = len(curve.E_grid) // 2
    return float(curve.d2S_dE2[mid])
