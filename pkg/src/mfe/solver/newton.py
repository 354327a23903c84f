"""Damped Newton solvers for the two problem forms.

Q(mu): -Lap u = mu e^u with local Jacobian A - mu diag(e^u).
P(lam): -Lap u = lam e^u / int e^u with the nonlocal rank-one Jacobian
        A - lam diag(delta) + lam delta d^T,  d = w * delta,
        inverted through a Sherman-Morrison update around the local part.

newton_Q escalates when plain damping fails: natural continuation in mu
with a secant predictor, and finally a Moore-Spence fold solve.  If the
target mu overshoots the discrete fold mu*_h by no more than O(h^2), the
fold solution itself is returned flagged `fold_limited` — the discrete
fold sits an O(h^2) distance below the continuum one, so asking for the
continuum fold value is legitimate and must not error out.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .._log import get_logger
from .functionals import mass_integral, safe_exp
from .linalg import linear_solver

log = get_logger("mfe.solver")

MAX_ITER = 50
MIN_STEP = 2.0**-10


@dataclass
class Solution:
    u: np.ndarray
    grid: object
    mu: float = None
    lam: float = None
    sup_norm: float = 0.0
    residual_norm: float = 0.0
    converged: bool = False
    fold_limited: bool = False

    def __post_init__(self):
        self.sup_norm = float(np.max(np.abs(self.u))) if len(self.u) else 0.0


@dataclass
class SolveReport:
    iterations: int = 0
    residual: float = np.inf
    damping: list = field(default_factory=list)
    wall_time: float = 0.0


def _newton_damped_Q(grid, mu, u0, tol, max_iter=MAX_ITER, report=None):
    """Core damped Newton for Q(mu); returns u or None on divergence."""
    u = np.array(u0, dtype=float)
    A = grid.A
    for _ in range(max_iter):
        e = safe_exp(u)
        res = A @ u - mu * e
        rn = float(np.max(np.abs(res)))
        if report is not None:
            report.iterations += 1
            report.residual = rn
        if rn <= tol:
            return u
        J = (A - sparse.diags(mu * e)).tocsc()
        try:
            step = linear_solver(J)(-res)
        except RuntimeError:
            return None
        s = 1.0
        while s >= MIN_STEP:
            trial = u + s * step
            rt = float(np.max(np.abs(A @ trial - mu * safe_exp(trial))))
            if rt < rn:
                break
            s *= 0.5
        else:
            return None
        if report is not None:
            report.damping.append(s)
        u = u + s * step
    e = safe_exp(u)
    if float(np.max(np.abs(A @ u - mu * e))) <= tol:
        return u
    return None


def newton_Q(grid, mu, init=None, max_iter=MAX_ITER):
    """Solve Q(mu) on the grid; returns (Solution, SolveReport).

    Falls back to continuation from mu = 0 and a fold solve when direct
    damping fails; raises RuntimeError when mu is beyond the discrete fold
    by more than the O(h^2) window.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    t0 = time.perf_counter()
    rep = SolveReport()
    tol = 1e-10 * (1.0 + mu)
    u0 = np.zeros(grid.n) if init is None else np.asarray(init, dtype=float)
    if not np.all(np.isfinite(u0)):
        raise ValueError("init field contains non-finite entries")

    if mu == 0.0:
        rep.residual, rep.wall_time = 0.0, time.perf_counter() - t0
        return Solution(np.zeros(grid.n), grid, mu=0.0, residual_norm=0.0,
                        converged=True), rep

    u = _newton_damped_Q(grid, mu, u0, tol, max_iter, rep)
    if u is None:
        log.info("newton_Q(mu=%.6g): direct solve failed, continuing from 0", mu)
        u, mu_reached, fold = _continue_to_mu(grid, mu, tol, rep)
        if fold is not None:
            mu_star, u_star = fold
            window = 100.0 * max(grid.hx, grid.hy) ** 2 * (1.0 + mu_star)
            if mu_star < mu <= mu_star + window:
                sol = Solution(u_star, grid, mu=mu_star, fold_limited=True,
                               converged=True)
                sol.residual_norm = float(
                    np.max(np.abs(grid.A @ u_star - mu_star * safe_exp(u_star))))
                rep.residual = sol.residual_norm
                rep.wall_time = time.perf_counter() - t0
                log.info("newton_Q: fold-limited at mu*_h=%.8g (asked %.8g)",
                         mu_star, mu)
                return sol, rep
            raise RuntimeError(
                f"mu={mu} is beyond the discrete fold mu*_h={mu_star:.8g} "
                f"(+O(h^2) window {window:.2e}); no minimal solution")
        if u is None:
            raise RuntimeError(f"newton_Q failed to reach mu={mu}")

    sol = Solution(u, grid, mu=mu, converged=True)
    sol.residual_norm = float(np.max(np.abs(grid.A @ u - mu * safe_exp(u))))
    rep.residual = sol.residual_norm
    rep.wall_time = time.perf_counter() - t0
    return sol, rep


def _continue_to_mu(grid, target, tol, rep):
    """Natural continuation 0 -> target with secant prediction.

    Returns (u_at_target | None, mu_reached, fold_info) where fold_info is
    (mu*_h, u*) from a Moore-Spence solve if continuation stagnates."""
    mu_prev, u_prev = 0.0, np.zeros(grid.n)
    mu_cur, u_cur = 0.0, np.zeros(grid.n)
    dmu = target / 8.0
    while mu_cur < target:
        mu_next = min(mu_cur + dmu, target)
        pred = u_cur
        if mu_cur > mu_prev:
            pred = u_cur + (u_cur - u_prev) * ((mu_next - mu_cur) / (mu_cur - mu_prev))
        tol_step = 1e-10 * (1.0 + mu_next)
        u_next = _newton_damped_Q(grid, mu_next, pred, tol_step, 12, rep)
        if u_next is None:
            dmu *= 0.5
            if dmu < 2e-4 * (1.0 + target):
                fold = _fold_solve_Q(grid, mu_cur, u_cur)
                return None, mu_cur, fold
            continue
        mu_prev, u_prev = mu_cur, u_cur
        mu_cur, u_cur = mu_next, u_next
        dmu = min(dmu * 1.5, target)
    return u_cur, mu_cur, None


def _fold_solve_Q(grid, mu0, u0, max_iter=40):
    """Moore-Spence system for the fold of Q:

        A u - mu e^u = 0,   (A - mu diag(e^u)) phi = 0,   w^T phi = 1.

    Newton on the bordered sparse system; init phi by inverse iteration on
    the near-singular linearization.  Returns (mu*, u*) or None.
    """
    n = grid.n
    A = grid.A
    # initial null-vector guess
    e = safe_exp(u0)
    J = (A - sparse.diags(mu0 * e)).tocsc()
    try:
        solve = linear_solver((J + sparse.eye(n) * (1e-8 * (1 + mu0))).tocsc())
    except RuntimeError:
        return None
    phi = np.ones(n)
    for _ in range(50):
        phi = solve(phi)
        phi /= np.linalg.norm(phi)
    phi /= grid.w @ phi
    u, mu = np.array(u0), mu0

    for _ in range(max_iter):
        e = safe_exp(u)
        M = A - sparse.diags(mu * e)
        F1 = A @ u - mu * e
        F2 = M @ phi
        F3 = grid.w @ phi - 1.0
        rn = max(np.max(np.abs(F1)), np.max(np.abs(F2)), abs(F3))
        if rn <= 1e-10 * (1.0 + mu):
            log.debug("fold solve converged: mu*=%.10g", mu)
            return mu, u
        big = sparse.bmat([
            [M, None, sparse.csc_matrix(-e.reshape(-1, 1))],
            [sparse.diags(-mu * e * phi), M,
             sparse.csc_matrix(-(e * phi).reshape(-1, 1))],
            [None, sparse.csc_matrix(grid.w.reshape(1, -1)),
             sparse.csc_matrix((1, 1))],
        ], format="csc")
        rhs = -np.concatenate([F1, F2, [F3]])
        try:
            dz = linear_solver(big)(rhs)
        except RuntimeError:
            return None
        if not np.all(np.isfinite(dz)):
            return None
        # damped update on the extended residual
        s = 1.0
        while s >= MIN_STEP:
            ut, pt, mt = u + s * dz[:n], phi + s * dz[n:2 * n], mu + s * dz[-1]
            et = safe_exp(ut)
            r1 = np.max(np.abs(A @ ut - mt * et))
            r2 = np.max(np.abs((A - sparse.diags(mt * et)) @ pt))
            if max(r1, r2, abs(grid.w @ pt - 1.0)) < rn:
                break
            s *= 0.5
        else:
            return None
        u, phi, mu = u + s * dz[:n], phi + s * dz[n:2 * n], mu + s * dz[-1]
    return None


def newton_P(grid, lam, init=None, max_iter=MAX_ITER):
    """Solve P(lam) by damped Newton with the Sherman-Morrison step."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    t0 = time.perf_counter()
    rep = SolveReport()
    tol = 1e-10 * (1.0 + lam)
    u = np.zeros(grid.n) if init is None else np.array(init, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("init field contains non-finite entries")
    A = grid.A

    for _ in range(max_iter):
        e = safe_exp(u)
        I = float(grid.w @ e)
        delta = e / I
        res = A @ u - lam * delta
        rn = float(np.max(np.abs(res)))
        rep.iterations += 1
        rep.residual = rn
        if rn <= tol:
            sol = Solution(u, grid, lam=lam, residual_norm=rn, converged=True)
            rep.wall_time = time.perf_counter() - t0
            return sol, rep
        step = _sm_step(grid, A, lam, delta, -res)
        s = 1.0
        while s >= MIN_STEP:
            trial = u + s * step
            et = safe_exp(trial)
            rt = float(np.max(np.abs(A @ trial - lam * et / (grid.w @ et))))
            if rt < rn:
                break
            s *= 0.5
        else:
            raise RuntimeError(
                f"newton_P(lam={lam}) stalled at residual {rn:.3e}")
        rep.damping.append(s)
        u = u + s * step
    raise RuntimeError(f"newton_P(lam={lam}) diverged after {max_iter} iterations")


def _sm_step(grid, A, lam, delta, rhs):
    """Solve (A - lam diag(delta) + lam delta d^T) x = rhs, d = w*delta."""
    M = (A - sparse.diags(lam * delta)).tocsc()
    solve = linear_solver(M)
    d = grid.w * delta
    y = solve(rhs)
    z = solve(lam * delta)
    denom = 1.0 + d @ z
    if abs(denom) < 1e-14:
        raise RuntimeError("rank-one denominator vanished (fold/bifurcation)")
    return y - z * ((d @ y) / denom)


def newton_P_deflated(grid, lam, known, init, max_iter=80, tol_factor=1e-10):
    """Newton for P(lam) with solutions in `known` deflated away.

    The merit function is M(u)*||F(u)|| with the standard product penalty
    M(u) = prod_j (1/||u - u_j||_w^2 + 1); the deflated Newton direction is
    the plain one rescaled by 1/(1 - grad M . step / M), so each iteration
    still costs one Jacobian solve.
    """
    u = np.array(init, dtype=float)
    A = grid.A
    tol = tol_factor * (1.0 + lam)
    for _ in range(max_iter):
        e = safe_exp(u)
        I = float(grid.w @ e)
        delta = e / I
        res = A @ u - lam * delta
        rn = float(np.max(np.abs(res)))
        if rn <= tol:
            far = all(_wdist2(grid, u, v) > 1e-8 for v in known)
            if not far:
                return None  # converged back onto a known solution
            return Solution(u, grid, lam=lam, residual_norm=rn, converged=True)
        try:
            step = _sm_step(grid, A, lam, delta, -res)
        except RuntimeError:
            return None
        # deflation rescaling: step / (1 - grad(log M) . step)
        Mval, grad_dot = 1.0, 0.0
        area = grid.domain.area
        for v in known:
            diff = u - v
            dist2 = _wdist2(grid, u, v)
            if dist2 < 1e-14:
                return None
            m_j = 1.0 / dist2 + 1.0
            Mval *= m_j
            grad_dot += (-2.0 / (area * dist2**2)) * ((grid.w * diff) @ step) / m_j
        tau = 1.0 - grad_dot
        if abs(tau) < 1e-12:
            return None
        step = step / tau
        merit0 = Mval * rn
        s = 1.0
        while s >= MIN_STEP:
            trial = u + s * step
            et = safe_exp(trial)
            rt = float(np.max(np.abs(A @ trial - lam * et / (grid.w @ et))))
            Mt = 1.0
            ok = True
            for v in known:
                dist2 = _wdist2(grid, trial, v)
                if dist2 < 1e-14:
                    ok = False
                    break
                Mt *= 1.0 / dist2 + 1.0
            if ok and Mt * rt < merit0:
                break
            s *= 0.5
        else:
            return None
        u = u + s * step
    return None


def _wdist2(grid, a, b):
    diff = a - b
    return float(grid.w @ (diff * diff)) / grid.domain.area
