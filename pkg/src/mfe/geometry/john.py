"""Maximum-area inscribed (John) ellipse of a convex polygon.

The ellipse {center + B s : |s| <= 1} with SPD shape matrix B sits inside
the half-plane a.x <= b iff  a.center + ||B a|| <= b,  so maximizing
log det B under those m smooth constraints is a tiny convex program.  It is
solved here with a log-barrier Newton method on the five variables
(cx, cy, b11, b12, b22), with analytic gradients and Hessians.

John's theorem then sandwiches the polygon between the ellipse and its
concentric double, which is what the thin-domain machinery needs; and the
inscribed-area ratio is at least pi/(3*sqrt(3)) (attained by triangles,
where the John ellipse is the Steiner inellipse).
"""

import math

import numpy as np

from .._log import get_logger

log = get_logger("mfe.geometry")

LASSAK_RATIO = math.pi / (3.0 * math.sqrt(3.0))


def john_ellipse(polygon, tol: float = 1e-10):
    """Return (center, B, area) of the largest inscribed ellipse."""
    a = polygon._normals          # (m, 2) outward unit normals
    b = polygon._offsets          # (m,)
    m = len(b)

    center = polygon.centroid
    gap0 = float(np.min(b - a @ center))
    if gap0 <= 0:
        raise ValueError("polygon centroid not strictly inside (degenerate)")
    z = np.array([center[0], center[1], 0.9 * gap0, 0.0, 0.9 * gap0])

    t = 1.0
    while m / t > tol:
        z = _newton_inner(z, a, b, t)
        t *= 10.0
        if t > 1e18:
            raise RuntimeError("barrier failed to converge")
    c = z[:2]
    B = np.array([[z[2], z[3]], [z[3], z[4]]])
    return c, B, math.pi * float(np.linalg.det(B))


def _gaps(z, a, b):
    B = np.array([[z[2], z[3]], [z[3], z[4]]])
    u = a @ B                      # (m, 2), rows B a_i (B symmetric)
    r = np.hypot(u[:, 0], u[:, 1])
    return b - a @ z[:2] - r, u, r, B


def _feasible(z, a, b):
    if z[2] <= 0 or z[2] * z[4] - z[3] ** 2 <= 0:
        return False
    g, _, _, _ = _gaps(z, a, b)
    return bool(np.all(g > 0))


def _objective(z, a, b, t):
    g, _, _, _ = _gaps(z, a, b)
    det = z[2] * z[4] - z[3] ** 2
    return -t * math.log(det) - float(np.sum(np.log(g)))


def _newton_inner(z, a, b, t, max_iter=60):
    for _ in range(max_iter):
        g, u, r, B = _gaps(z, a, b)
        uhat = u / r[:, None]
        # dr/d(b11,b12,b22) per edge
        q = np.column_stack([
            uhat[:, 0] * a[:, 0],
            uhat[:, 0] * a[:, 1] + uhat[:, 1] * a[:, 0],
            uhat[:, 1] * a[:, 1],
        ])
        p = np.column_stack([a, q])   # (m, 5) = -grad g_i

        S = np.linalg.inv(B)
        s11, s12, s22 = S[0, 0], S[0, 1], S[1, 1]
        grad = p.T @ (1.0 / g)
        grad[2:] -= t * np.array([s11, 2.0 * s12, s22])

        H = (p / g[:, None]**2).T @ p
        # curvature of the norm terms: M^T (I - uhat uhat^T) M / r per edge
        for i in range(len(g)):
            a1, a2 = a[i]
            M = np.array([[a1, a2, 0.0], [0.0, a1, a2]])
            P = np.eye(2) - np.outer(uhat[i], uhat[i])
            H[2:, 2:] += (M.T @ P @ M) / (r[i] * g[i])
        Hld = np.array([
            [s11**2, 2 * s11 * s12, s12**2],
            [2 * s11 * s12, 2 * (s12**2 + s11 * s22), 2 * s12 * s22],
            [s12**2, 2 * s12 * s22, s22**2],
        ])
        H[2:, 2:] += t * Hld

        step = np.linalg.solve(H, -grad)
        decrement = float(-grad @ step)
        if decrement < 1e-14 * (1.0 + t):
            break
        f0 = _objective(z, a, b, t)
        alpha = 1.0
        for _ in range(60):
            zn = z + alpha * step
            if _feasible(zn, a, b) and _objective(zn, a, b, t) <= f0 - 0.25 * alpha * decrement:
                break
            alpha *= 0.5
        else:
            log.info("john: line search stalled at t=%.1e", t)
            break
        z = zn
    return z


def inscribed_ratio(polygon) -> float:
    """|John ellipse| / |polygon|  (>= pi/(3 sqrt 3) for convex bodies)."""
    _, _, area = john_ellipse(polygon)
    return area / polygon.area


def sandwich_gap(polygon) -> float:
    """Largest ||B^-1 (v - c)|| over vertices; <= 2 certifies K inside 2E."""
    c, B, _ = john_ellipse(polygon)
    s = np.linalg.solve(B, (polygon.vertices - c).T)
    return float(np.max(np.hypot(s[0], s[1])))
