"""Branch continuation with automatic fold handling.

States are continued either in the bare multiplier (``control="mu"``, the
unnormalized problem) or in the total mass (``control="lambda"``, the
normalized problem).  Natural continuation with a secant predictor is used
while the parameter advances comfortably; when Newton fails or the tangent's
parameter component collapses, the stepper switches to pseudo-arclength with
a bordered corrector, which carries the branch around folds.

Each accepted point stores the scalar diagnostics used downstream (mass,
sup norm, energy, entropy, variational value, leading eigenvalues when
requested) so branch consumers never re-solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .._log import get_logger
from ..solver.functionals import (
    F_lambda,
    delta_of,
    energy,
    entropy,
    mass_integral,
    safe_exp,
)
from ..solver.newton import _newton_damped_Q, newton_P
from ..spectrum import stability_P, stability_Q

__all__ = ["BranchPoint", "Branch", "continue_branch"]

log = get_logger("mfe.branch")

_TOL_FACTOR = 1e-10
_MAX_NATURAL_ITER = 12
_MAX_BORDERED_ITER = 20
_GROW, _SHRINK = 1.4, 0.5
_TANGENT_SWITCH = 0.05  # |dp/ds| below this fraction -> pseudo-arclength


@dataclass
class BranchPoint:
    lam: float
    mu: float
    u: np.ndarray
    sup_norm: float
    energy: float
    entropy: float
    F_lambda: float
    tau1: float = math.nan
    nu0: float = math.nan
    fold_flag: bool = False


@dataclass
class Branch:
    points: list
    control: str
    alpha: float
    grid: object = None
    steps: list = dc_field(default_factory=list)
    fold_indices: list = dc_field(default_factory=list)
    fold_param: float = math.nan
    fold_bracket: tuple = ()
    truncated: bool = False
    diagnostic: str = ""

    def __len__(self):
        return len(self.points)

    def column(self, name):
        return np.array([getattr(p, name) for p in self.points])


def _weighted_norm2(grid, v):
    return float(grid.w @ (v * v)) / grid.domain.area


def _residual(grid, u, p, control):
    if control == "mu":
        return grid.A @ u - p * safe_exp(u)
    e = safe_exp(u)
    return grid.A @ u - p * e / float(grid.w @ e)


def _natural_solve(grid, p, pred, control):
    tol = _TOL_FACTOR * (1.0 + p)
    if control == "mu":
        return _newton_damped_Q(grid, p, pred, tol, _MAX_NATURAL_ITER)
    try:
        sol, rep = newton_P(grid, p, init=pred, max_iter=_MAX_NATURAL_ITER)
    except RuntimeError:
        return None
    return sol.u


def _bordered_solve(grid, u0, p0, t_u, t_p, u_pred, p_pred, control):
    """Damped Newton on [residual; tangent-orthogonality] around the
    predictor.  The normalized problem's rank-one Jacobian block is handled
    with an auxiliary unknown so the bordered matrix stays sparse."""
    n = grid.n
    u, p = np.array(u0), float(p0)
    tol = _TOL_FACTOR * (1.0 + abs(p))
    wrow = (grid.w * t_u / grid.domain.area).reshape(1, n)

    def constraint(uu, pp):
        return float(t_u @ (grid.w * (uu - u_pred))) / grid.domain.area \
            + t_p * (pp - p_pred)

    for _ in range(_MAX_BORDERED_ITER):
        res = _residual(grid, u, p, control)
        con = constraint(u, p)
        rn = max(float(np.max(np.abs(res))), abs(con))
        if rn <= tol:
            return u, p
        e = safe_exp(u)
        if control == "mu":
            J = grid.A - sparse.diags(p * e)
            dGdp = -e
            M = sparse.bmat(
                [[J, dGdp.reshape(n, 1)], [wrow, np.array([[t_p]])]],
                format="csc")
            rhs = np.concatenate([-res, [-con]])
            try:
                step = splu(M).solve(rhs)
            except RuntimeError:
                return None
            du, dp = step[:n], step[n]
        else:
            I = float(grid.w @ e)
            delta = e / I
            J = grid.A - sparse.diags(p * delta)
            d = grid.w * delta
            # unknowns (du, xi, dp) with xi = d . du absorbing the rank-one
            M = sparse.bmat(
                [[J, (p * delta).reshape(n, 1), (-delta).reshape(n, 1)],
                 [d.reshape(1, n), np.array([[-1.0]]), None],
                 [wrow, None, np.array([[t_p]])]],
                format="csc")
            rhs = np.concatenate([-res, [0.0], [-con]])
            try:
                step = splu(M).solve(rhs)
            except RuntimeError:
                return None
            du, dp = step[:n], step[n + 1]
        s = 1.0
        while s >= 2.0 ** -10:
            ut, pt = u + s * du, p + s * dp
            rt = max(float(np.max(np.abs(_residual(grid, ut, pt, control)))),
                     abs(constraint(ut, pt)))
            if rt < rn:
                u, p = ut, pt
                break
            s *= 0.5
        else:
            return None
    return None


def _make_point(grid, u, p, control, compute_spectrum, eig_seed):
    I = mass_integral(grid, u)
    if control == "mu":
        mu, lam = p, p * I
    else:
        lam, mu = p, p / I
    d = delta_of(grid, u)
    pt = BranchPoint(
        lam=lam, mu=mu, u=u,
        sup_norm=float(np.max(np.abs(u))),
        energy=energy(grid, u, lam),
        entropy=entropy(grid, d),
        F_lambda=F_lambda(grid, u, lam),
    )
    seed_out = eig_seed
    if compute_spectrum:
        full = stability_P(grid, u, lam, x0=eig_seed)
        nu = stability_Q(grid, u, mu, x0=full.field)
        pt.tau1, pt.nu0 = full.value, nu.value
        seed_out = full.field
    return pt, seed_out


def continue_branch(grid, control="lambda", target=None, n_max=400,
                    ds0=None, sup_cap=12.0, arclength=None,
                    compute_spectrum=False):
    """Continue the solution branch from the trivial state.

    Stops when the control parameter reaches ``target`` (the last point is
    then solved at the target exactly), or when the sup norm passes
    ``sup_cap`` / the total arclength passes ``arclength`` / ``n_max``
    points are stored -- whichever comes first.  On step underflow the
    branch is truncated and flagged rather than raised.
    """
    if control not in ("mu", "lambda"):
        raise ValueError("control must be 'mu' or 'lambda'")
    if target is None and arclength is None and n_max >= 10**6:
        raise ValueError("give a target, an arclength budget, or n_max")

    alpha = float(getattr(grid.domain, "alpha", math.nan))
    br = Branch(points=[], control=control, alpha=alpha, grid=grid)

    u = np.zeros(grid.n)
    p = 0.0
    pt, eig_seed = _make_point(grid, u, p, control, compute_spectrum, None)
    br.points.append(pt)

    if ds0 is None:
        ds0 = (target if target is not None else
               (4.0 * math.pi if control == "lambda" else 1.0)) / 12.0
    ds = ds0
    ds_min = 1e-6 * ds0

    tang_u, tang_p = np.zeros(grid.n), 1.0  # initial tangent: parameter axis
    prev_tp = 1.0
    s_total = 0.0
    s_marks = [0.0]
    arc_mode = False

    while len(br.points) < n_max:
        if target is not None and p >= target - 1e-12:
            break
        if arclength is not None and s_total >= arclength:
            break
        if br.points[-1].sup_norm >= sup_cap:
            break

        accepted = False
        while ds >= ds_min:
            if not arc_mode:
                p_try = p + ds
                if target is not None:
                    p_try = min(p_try, target)
                pred = u + tang_u * ((p_try - p) / tang_p) \
                    if tang_p != 0.0 else u
                u_new = _natural_solve(grid, p_try, pred, control)
                if u_new is None:
                    # natural Newton failed: hand over to pseudo-arclength
                    arc_mode = True
                    log.debug("natural step failed at %s=%.6g: arclength on",
                              control, p)
                    continue
                if np.max(np.abs(u_new - u)) > 6.0:
                    ds *= _SHRINK
                    continue
                p_new = p_try
            else:
                p_pred = p + ds * tang_p
                if target is not None and tang_p > 0.0 and p_pred > target:
                    # would overshoot: land exactly on the target instead
                    u_t = _natural_solve(grid, target, u, control)
                    if u_t is not None:
                        u_new, p_new = u_t, target
                        accepted = True
                        break
                u_pred = u + ds * tang_u
                out = _bordered_solve(grid, u_pred, p_pred, tang_u, tang_p,
                                      u_pred, p_pred, control)
                if out is None or np.max(np.abs(out[0] - u)) > 6.0:
                    ds *= _SHRINK
                    continue
                u_new, p_new = out
            accepted = True
            break
        if not accepted:
            br.truncated = True
            br.diagnostic = (f"step underflow at {control}={p:.6g}, "
                             f"sup={br.points[-1].sup_norm:.3g}")
            log.info("branch truncated: %s", br.diagnostic)
            break

        # secant tangent, normalized in the weighted product
        du = u_new - u
        dp = p_new - p
        ds_eff = math.sqrt(_weighted_norm2(grid, du) + dp * dp)
        if ds_eff == 0.0:
            br.truncated = True
            br.diagnostic = "stagnant step"
            break
        tang_u, tang_p = du / ds_eff, dp / ds_eff
        s_total += ds_eff
        s_marks.append(s_total)

        u, p = u_new, p_new
        pt, eig_seed = _make_point(grid, u, p, control, compute_spectrum,
                                   eig_seed)
        br.points.append(pt)
        br.steps.append(ds_eff)

        # fold: the tangent's parameter component changes sign
        if prev_tp * tang_p < 0.0 and len(br.points) >= 3:
            k = len(br.points) - 2
            br.points[k].fold_flag = True
            br.fold_indices.append(k)
            if math.isnan(br.fold_param):
                ss = np.array(s_marks[k - 1:k + 2])
                pp = np.array([getattr(br.points[i], "mu" if control == "mu"
                                       else "lam") for i in (k - 1, k, k + 1)])
                coef = np.polyfit(ss - ss[1], pp, 2)
                vertex = -coef[1] / (2.0 * coef[0]) if coef[0] != 0.0 else 0.0
                br.fold_param = float(np.polyval(coef, vertex))
                half = max(abs(ds_eff), abs(br.steps[-2]))
                br.fold_bracket = (br.fold_param - half, br.fold_param + half)
                log.info("fold detected: %s* ~ %.8g", control, br.fold_param)
        prev_tp = tang_p

        if not arc_mode:
            # switch to arclength when the parameter barely advances
            if abs(dp) < _TANGENT_SWITCH * ds_eff:
                arc_mode = True
                log.debug("switching to pseudo-arclength at %s=%.6g", control, p)
            elif len(br.steps) >= 1 and ds < ds0:
                ds = min(ds * _GROW, ds0)
        else:
            ds = min(ds * _GROW, ds0)

    if target is not None and not br.truncated and p < target - 1e-12:
        if br.points[-1].sup_norm >= sup_cap:
            why = f"sup cap {sup_cap:g} reached"
        elif arclength is not None and s_total >= arclength:
            why = f"arclength budget {arclength:g} spent"
        else:
            why = f"point budget n_max={n_max} spent"
        br.truncated = True
        br.diagnostic = (f"{why} at {control}={p:.6g} before target "
                         f"{target:.6g}")
        log.info("branch truncated: %s", br.diagnostic)
    return br
