"""Shared sparse linear algebra: factorized solves and a generalized
shift-invert power iteration for the smallest pencil eigenvalue."""

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg, spilu, splu

from .._log import get_logger

log = get_logger("mfe.solver")

_DIRECT_LIMIT = 400_000  # unknowns; beyond this use ILU-preconditioned CG


def linear_solver(A: sparse.spmatrix):
    """Return solve(b) for the sparse matrix A (direct if affordable)."""
    n = A.shape[0]
    if n <= _DIRECT_LIMIT:
        lu = splu(A.tocsc())
        return lu.solve
    ilu = spilu(A.tocsc(), drop_tol=1e-5, fill_factor=20)
    prec = LinearOperator(A.shape, ilu.solve)

    def solve(b):
        x, info = cg(A, b, rtol=1e-12, atol=0.0, maxiter=2000, M=prec)
        if info != 0:
            raise RuntimeError(f"iterative solve failed (info={info})")
        return x

    return solve


def shift_invert_smallest(M, n_diag, sigma, rank_one=None, tol=1e-10,
                          max_iter=800, x0=None, reshift=True):
    """Smallest eigenvalue of the pencil (M + u v^T) phi = theta diag(n) phi.

    Plain inverse power iteration on (M + uv^T - sigma N)^{-1} N with the
    rank-one part folded in by the Sherman-Morrison update, so only the
    sparse base M - sigma N is factorized.  `sigma` must lie strictly below
    the smallest eigenvalue.  Returns (theta, phi, iterations, residual)
    with phi normalized so phi^T N phi = 1.

    If convergence stalls (clustered spectrum), the shift is moved once
    next to the current estimate; tiny problems fall back to a dense solve.
    """
    n = M.shape[0]
    N = sparse.diags(n_diag)
    rng = np.random.default_rng(1234)
    x = rng.standard_normal(n) if x0 is None else np.array(x0, dtype=float)

    def make_apply(shift):
        base = (M - shift * N).tocsc()
        solve = linear_solver(base)
        if rank_one is None:
            return lambda b: solve(b)
        u, v = rank_one
        bu = solve(u)
        denom = 1.0 + v @ bu

        def apply(b):
            y = solve(b)
            return y - bu * ((v @ y) / denom)

        return apply

    def matvec_M(x):
        y = M @ x
        if rank_one is not None:
            u, v = rank_one
            y = y + u * (v @ x)
        return y

    apply = make_apply(sigma)
    theta_old = np.inf
    total = 0
    shifted = False
    for it in range(1, max_iter + 1):
        total = it
        y = apply(n_diag * x)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            raise RuntimeError("inverse iteration broke down")
        x = y / ny
        Mx = matvec_M(x)
        Nx = n_diag * x
        theta = (Mx @ Nx) / (Nx @ Nx)
        res = np.linalg.norm(Mx - theta * Nx) / max(np.linalg.norm(Mx), 1e-300)
        if res <= tol:
            break
        if abs(theta - theta_old) <= 1e-13 * (1.0 + abs(theta)) and res > tol:
            if reshift and not shifted:
                # crawl: move the shift right next to the estimate
                sigma = theta - 1e-3 * (1.0 + abs(theta))
                apply = make_apply(sigma)
                shifted = True
                log.debug("shift-invert: reshift to %.6g (res %.2e)", sigma, res)
            elif n <= 1600:
                return _dense_smallest(M, n_diag, rank_one)
    # normalize phi^T N phi = 1, largest-magnitude entry positive
    scale = np.sqrt(x @ (n_diag * x))
    x = x / scale
    if x[np.argmax(np.abs(x))] < 0:
        x = -x
    Mx = matvec_M(x)
    Nx = n_diag * x
    theta = (Mx @ Nx) / (Nx @ Nx)
    res = np.linalg.norm(Mx - theta * Nx) / max(np.linalg.norm(Mx), 1e-300)
    return theta, x, total, res


def _dense_smallest(M, n_diag, rank_one):
    from scipy.linalg import eig

    A = M.toarray()
    if rank_one is not None:
        u, v = rank_one
        A = A + np.outer(u, v)
    vals, vecs = eig(A, np.diag(n_diag))
    vals = np.real(vals)
    k = int(np.argmin(vals))
    x = np.real(vecs[:, k])
    x = x / np.sqrt(x @ (n_diag * x))
    if x[np.argmax(np.abs(x))] < 0:
        x = -x
    Mx = A @ x
    Nx = n_diag * x
    theta = float(vals[k])
    res = np.linalg.norm(Mx - theta * Nx) / max(np.linalg.norm(Mx), 1e-300)
    return theta, x, -1, res
