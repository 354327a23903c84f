"""Shortley-Weller finite differences on a rectangular lattice.

The discrete negative Laplacian uses shortened boundary arms: at an
interior node whose lattice neighbor falls outside the domain, the arm is
cut at the exact analytic boundary intersection (fraction theta of the full
spacing), giving along each axis

    (-u_xx)_h = (2/hx^2) * [ u_i / (tW*tE)
                             - u_E / (tE*(tE+tW))
                             - u_W / (tW*(tE+tW)) ]

with Dirichlet values dropped.  The scheme is an M-matrix and is exact on
quadratic polynomials for any arm lengths, which the series-expansion
acceptance checks depend on.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .quadrature import build_weights

RESOLUTION_MIN = 8
RESOLUTION_MAX = 4096

_THETA_FLOOR = 1e-12


@dataclass
class Grid:
    """Discretized domain: interior nodes, SW operator, quadrature weights."""

    domain: object
    nx: int
    ny: int
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray          # (ny, nx) interior flags
    index: np.ndarray         # (ny, nx) node number or -1
    node_i: np.ndarray        # (n,) lattice x-index per node
    node_j: np.ndarray        # (n,) lattice y-index per node
    theta: np.ndarray         # (n, 4) arm fractions, order W E S N
    A: sparse.csr_matrix      # negative Laplacian on interior nodes
    w: np.ndarray             # quadrature weights
    hx: float = field(init=False)
    hy: float = field(init=False)

    def __post_init__(self):
        self.hx = float(self.xs[1] - self.xs[0])
        self.hy = float(self.ys[1] - self.ys[0])

    @property
    def n(self) -> int:
        return len(self.node_i)

    @property
    def x(self) -> np.ndarray:
        return self.xs[self.node_i]

    @property
    def y(self) -> np.ndarray:
        return self.ys[self.node_j]

    def integrate(self, values: np.ndarray) -> float:
        return float(self.w @ values)

    def eval(self, fn) -> np.ndarray:
        return np.asarray(fn(self.x, self.y), dtype=float)

    def field_grid(self, values: np.ndarray) -> np.ndarray:
        """Scatter nodal values onto the (ny, nx) lattice (NaN outside)."""
        out = np.full(self.mask.shape, np.nan)
        out[self.mask] = values
        return out

    def interp(self, values: np.ndarray, px: float, py: float) -> float:
        """Bilinear interpolation; falls back to the nearest interior node
        when the surrounding lattice cell is not fully interior."""
        i = int(np.clip(np.searchsorted(self.xs, px) - 1, 0, self.nx - 2))
        j = int(np.clip(np.searchsorted(self.ys, py) - 1, 0, self.ny - 2))
        ks = self.index[j:j + 2, i:i + 2]
        if np.all(ks >= 0):
            tx = (px - self.xs[i]) / self.hx
            ty = (py - self.ys[j]) / self.hy
            v = values[ks]
            return float((1 - ty) * ((1 - tx) * v[0, 0] + tx * v[0, 1])
                         + ty * ((1 - tx) * v[1, 0] + tx * v[1, 1]))
        d2 = (self.x - px) ** 2 + (self.y - py) ** 2
        return float(values[int(np.argmin(d2))])


def build_grid(domain, nx: int, ny: int) -> Grid:
    """Classify nodes, measure boundary arms, assemble operator and weights."""
    for label, m in (("nx", nx), ("ny", ny)):
        if not (RESOLUTION_MIN <= m <= RESOLUTION_MAX):
            raise ValueError(
                f"{label}={m} outside [{RESOLUTION_MIN}, {RESOLUTION_MAX}]")
    x0, x1, y0, y1 = domain.bbox()
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    hx = xs[1] - xs[0]
    hy = ys[1] - ys[0]

    X, Y = np.meshgrid(xs, ys)
    mask = domain.contains(X, Y)
    n = int(mask.sum())
    if n == 0:
        raise ValueError("no interior nodes; refine the grid")
    index = np.full((ny, nx), -1, dtype=np.int64)
    index[mask] = np.arange(n)
    jj, ii = np.nonzero(mask)

    # neighbor node numbers with a -1 frame for lattice-edge nodes
    padded = np.full((ny + 2, nx + 2), -1, dtype=np.int64)
    padded[1:-1, 1:-1] = index
    nbr = np.column_stack([
        padded[jj + 1, ii],      # W
        padded[jj + 1, ii + 2],  # E
        padded[jj, ii + 1],      # S
        padded[jj + 2, ii + 1],  # N
    ])

    theta = np.ones((n, 4))
    irregular = np.nonzero(np.any(nbr < 0, axis=1))[0]
    signs = (-1, 1, -1, 1)
    axes = (0, 0, 1, 1)
    steps = (hx, hx, hy, hy)
    for k in irregular:
        px, py = xs[ii[k]], ys[jj[k]]
        for d in range(4):
            if nbr[k, d] >= 0:
                continue
            t = domain.arm(px, py, axes[d], signs[d]) / steps[d]
            if t > 1.0 + 1e-9:
                raise RuntimeError(
                    f"arm longer than spacing at node {k} (theta={t})")
            theta[k, d] = min(max(t, _THETA_FLOOR), 1.0)

    A = _assemble(n, nbr, theta, hx, hy)
    w = build_weights(domain, xs, ys, mask, index)
    return Grid(domain, nx, ny, xs, ys, mask, index, ii, jj, theta, A, w)


def _assemble(n, nbr, theta, hx, hy):
    tW, tE, tS, tN = theta.T
    cx, cy = 2.0 / hx**2, 2.0 / hy**2
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    data = [cx / (tW * tE) + cy / (tS * tN)]
    for d, (t_near, t_far, coef) in enumerate((
            (tW, tE, cx), (tE, tW, cx), (tS, tN, cy), (tN, tS, cy))):
        have = nbr[:, d] >= 0
        rows.append(np.nonzero(have)[0])
        cols.append(nbr[have, d])
        data.append(-coef / (t_near[have] * (t_near[have] + t_far[have])))
    A = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))
    return A.tocsr()


def auto_resolution(domain, base: int = 256):
    """Anisotropic default: keep spacing roughly isotropic on thin ellipses
    by budgeting base^2 nodes as ny = base*sqrt(alpha), nx = ny/alpha."""
    from .domains import Ellipse

    if isinstance(domain, Ellipse) and domain.alpha < 1.0:
        ny = max(RESOLUTION_MIN * 4, int(round(base * np.sqrt(domain.alpha))))
        nx = min(RESOLUTION_MAX, int(round(ny / domain.alpha)))
        return nx, ny
    return base, base
