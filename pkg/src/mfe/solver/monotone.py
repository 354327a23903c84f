"""Constructive monotone iteration between a sub- and a supersolution.

With K at least mu*exp(max super), the map

    u  |->  (A + K)^{-1} (mu e^u + K u)

is order-preserving on the interval [sub, super]: starting from the
subsolution produces a nondecreasing sequence, from the supersolution a
nonincreasing one, and the two limits bracket a solution of Q(mu).  The
lower limit (the minimal solution in the interval) is returned.
"""

import numpy as np
from scipy import sparse

from .._log import get_logger
from .functionals import safe_exp
from .linalg import linear_solver
from .newton import Solution

log = get_logger("mfe.solver")

_MONOTONE_SLACK = 1e-12
_STEP_TOL = 1e-13
_MAX_SWEEPS = 500


def monotone_iterate(grid, mu, sub, super_, max_sweeps=_MAX_SWEEPS):
    """Run both one-sided iterations; return the lower limit as a Solution.

    Raises if the ordering sub <= super_ fails on input or if either
    sequence loses monotonicity beyond roundoff slack (a symptom of a grid
    too coarse for the profiles' curvature).
    """
    sub = np.asarray(sub, dtype=float)
    super_ = np.asarray(super_, dtype=float)
    gap = float(np.min(super_ - sub))
    if gap < -1e-10:
        raise ValueError(f"sub exceeds super by {-gap:.2e}; not an ordered pair")

    K = mu * float(np.exp(np.min([np.max(super_), 100.0])))
    solve = linear_solver((grid.A + K * sparse.eye(grid.n)).tocsr().tocsc())

    def sweep(u):
        return solve(mu * safe_exp(u) + K * u)

    lo, hi = sub, super_
    slack = _MONOTONE_SLACK * (1.0 + K)
    for k in range(max_sweeps):
        lo_next = sweep(lo)
        hi_next = sweep(hi)
        if float(np.min(lo_next - lo)) < -slack:
            raise RuntimeError(
                f"lower sequence lost monotonicity at sweep {k} "
                f"(min increment {np.min(lo_next - lo):.2e})")
        if float(np.max(hi_next - hi)) > slack:
            raise RuntimeError(
                f"upper sequence lost monotonicity at sweep {k} "
                f"(max increment {np.max(hi_next - hi):.2e})")
        moved = max(float(np.max(np.abs(lo_next - lo))),
                    float(np.max(np.abs(hi_next - hi))))
        lo, hi = lo_next, hi_next
        if moved <= _STEP_TOL * (1.0 + float(np.max(np.abs(lo)))):
            break
    else:
        log.info("monotone_iterate: hit sweep cap (last move %.2e)", moved)

    if float(np.min(hi - lo)) < -1e-8:
        raise RuntimeError("one-sided limits crossed; discretization too coarse")

    res = float(np.max(np.abs(grid.A @ lo - mu * safe_exp(lo))))
    sol = Solution(lo, grid, mu=mu, residual_norm=res,
                   converged=res <= 1e-8 * (1.0 + mu))
    return sol
