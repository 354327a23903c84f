"""Second solutions and uniqueness probing.

Above the critical mass 8*pi a second (unstable) solution is reached by
Newton started from a concentrated bubble ansatz with the already-known
minimal state deflated away.  The bubble is a cut-off logarithmic spike:

    phi(y) = log sum_j (1/k) * 8 m^2 / (1 + m^2 X_d(|y - x_j|)^2)^2
             - log 8 m^2 / (1 + 4 d^2 m^2)^2

inside the inner sandwich ellipse and zero outside, where X_d is a C^1
monotone cutoff freezing the radius at 2d.  Since X_d == 2d away from the
peaks, the first term matches the subtracted constant there and the field
vanishes identically before the inner boundary is reached.

The uniqueness probe runs a seeded multistart (zero, thin-profile, bubbles
at random admissible peaks, random smooth fields) with deflation against
everything found so far, and counts distinct states under an energy cap.
States whose density puts half or more of its mass in a single 3x3 node
patch are under-resolved spike artifacts of the discretization; they are
flagged and never counted, whatever the cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .. import closedform
from .._log import get_logger
from ..solver.functionals import delta_of, energy
from ..solver.newton import Solution, newton_P, newton_P_deflated

__all__ = [
    "cutoff_radius",
    "mountain_pass_init",
    "second_solution",
    "uniqueness_probe",
    "ProbeResult",
    "concentration_fraction",
]

log = get_logger("mfe.branch")

_PEAK_LADDER = (10.0, 30.0, 100.0, 300.0)
_DISTINCT_GAP = 1e-4
_CONCENTRATION_FRACTION = 0.5


def cutoff_radius(t, d: float):
    """C^1 monotone radius cutoff: identity below d, frozen at 2d above,
    cubic Hermite blend between (slope 1 -> 0)."""
    t = np.asarray(t, dtype=float)
    s = np.clip((t - d) / d, 0.0, 1.0)
    blend = d * (1.0 + s * (1.0 + s * (1.0 - s)))  # d*(1 + s + s^2 - s^3)
    return np.where(t <= d, t, np.where(t >= 2.0 * d, 2.0 * d, blend))


def _inner_ellipse_params(domain):
    """(alpha, beta_minus) of the inner sandwich ellipse; the canonical
    ellipse is its own inner ellipse."""
    alpha = getattr(domain, "alpha", None)
    if alpha is None:
        raise ValueError("bubble ansatz needs an elliptical (canonical) domain")
    beta_minus = float(getattr(domain, "beta_minus", 1.0))
    return float(alpha), beta_minus


def _inner_boundary_distance(alpha, beta_minus, x, y, n_samples=2048):
    th = np.linspace(0.0, 2.0 * math.pi, n_samples, endpoint=False)
    bx = (beta_minus / alpha) * np.cos(th)
    by = beta_minus * np.sin(th)
    return float(np.min(np.hypot(bx - x, by - y)))


def mountain_pass_init(grid, k: int, d: float, mu_peak: float,
                       peaks=None) -> np.ndarray:
    """Bubble ansatz field at the grid nodes (see module docstring).

    Peaks must sit inside the inner ellipse, pairwise more than 4d apart and
    more than 2d from its boundary; k = 1 defaults to the center.
    """
    if k < 1:
        raise ValueError("need at least one peak")
    if d <= 0.0 or mu_peak <= 0.0:
        raise ValueError("d and mu_peak must be positive")
    alpha, bm = _inner_ellipse_params(grid.domain)
    if peaks is None:
        if k == 1:
            peaks = [(0.0, 0.0)]
        else:
            # spread along the long axis, comfortably inside
            xs = np.linspace(-0.6, 0.6, k) * (bm / alpha)
            peaks = [(float(x), 0.0) for x in xs]
    if len(peaks) != k:
        raise ValueError("need exactly k peak points")
    for i, (px, py) in enumerate(peaks):
        if alpha * alpha * px * px + py * py >= bm * bm:
            raise ValueError(f"peak {i} lies outside the inner ellipse")
        if _inner_boundary_distance(alpha, bm, px, py) <= 2.0 * d:
            raise ValueError(f"peak {i} is within 2d of the inner boundary")
        for j in range(i):
            qx, qy = peaks[j]
            if math.hypot(px - qx, py - qy) <= 4.0 * d:
                raise ValueError(f"peaks {j} and {i} are within 4d")

    x, y = grid.x, grid.y
    m2 = mu_peak * mu_peak
    acc = np.zeros(grid.n)
    for (px, py) in peaks:
        r = np.hypot(x - px, y - py)
        chi = cutoff_radius(r, d)
        acc += (1.0 / k) * 8.0 * m2 / (1.0 + m2 * chi * chi) ** 2
    ref = 8.0 * m2 / (1.0 + 4.0 * d * d * m2) ** 2
    # the ansatz is >= 0 by construction (chi <= 2d); clear rounding noise
    # where the cutoff saturates so the plateau is exactly zero
    u = np.maximum(np.log(acc) - math.log(ref), 0.0)
    inner = (alpha * alpha * x * x + y * y) < bm * bm
    u = np.where(inner, u, 0.0)
    return u


def second_solution(grid, lam: float, u_min, d: float = 0.35,
                    peaks=None, ladder=_PEAK_LADDER):
    """Deflated Newton from the bubble ansatz; peak heights are tried along
    a ladder.  Succeeds when the new state sits strictly above the minimal
    one in both the variational value and the sup norm; returns None (with a
    log line) when the whole ladder fails, which is the expected outcome in
    the uniqueness regime."""
    from ..solver.functionals import F_lambda
    u0 = u_min.u if isinstance(u_min, Solution) else np.asarray(u_min)
    k = max(1, int(lam / (8.0 * math.pi)))
    F_min = F_lambda(grid, u0, lam)
    sup_min = float(np.max(np.abs(u0)))
    for mu_peak in ladder:
        init = mountain_pass_init(grid, k, d, mu_peak, peaks=peaks)
        cand = newton_P_deflated(grid, lam, [u0], init)
        if cand is None:
            continue
        F_c = F_lambda(grid, cand.u, lam)
        if F_c > F_min and cand.sup_norm > sup_min:
            return cand
        log.debug("second_solution: converged state not above the minimal "
                  "one (F %.6g vs %.6g), trying next peak height", F_c, F_min)
    log.info("second_solution: no admissible second state at lam=%.6g", lam)
    return None


def concentration_fraction(grid, u) -> float:
    """Largest share of the normalized density carried by one 3x3 node
    patch (centered at the density peak)."""
    d = delta_of(grid, u)
    wd = grid.w * d
    k = int(np.argmax(wd))
    i, j = int(grid.node_i[k]), int(grid.node_j[k])
    patch = grid.index[max(j - 1, 0):j + 2, max(i - 1, 0):i + 2]
    ids = patch[patch >= 0]
    return float(np.sum(wd[ids]))


@dataclass
class ProbeResult:
    count: int
    solutions: list
    excluded_concentrated: list
    seed: int
    starts: list = dc_field(default_factory=list)


def _random_admissible_peak(rng, alpha, bm, d):
    for _ in range(1000):
        x = rng.uniform(-bm / alpha, bm / alpha)
        y = rng.uniform(-bm, bm)
        if alpha * alpha * x * x + y * y >= (0.9 * bm) ** 2:
            continue
        if _inner_boundary_distance(alpha, bm, x, y, 512) > 2.0 * d:
            return x, y
    return 0.0, 0.0


def _random_smooth_field(rng, grid):
    xl, xh, yl, yh = grid.domain.bbox()
    u = np.zeros(grid.n)
    for mx in (1, 2):
        for my in (1, 2):
            c = rng.standard_normal()
            u += c * np.sin(mx * math.pi * (grid.x - xl) / (xh - xl)) \
                   * np.sin(my * math.pi * (grid.y - yl) / (yh - yl))
    scale = float(np.max(np.abs(u)))
    return 1.5 * u / scale if scale > 0 else u


def uniqueness_probe(grid, lam: float, e_cap: float = math.inf,
                     n_starts: int = 20, seed: int = 42,
                     d: float = 0.25) -> ProbeResult:
    """Seeded multistart count of distinct states at fixed mass.

    Distinct means a sup-norm gap above 1e-4.  Concentrated spike artifacts
    (half the density in one 3x3 patch) are reported but never counted; the
    energy cap then filters the remaining states.
    """
    rng = np.random.default_rng(seed)
    alpha, bm = _inner_ellipse_params(grid.domain)
    found = []       # every distinct converged state, artifacts included
    kept = []
    flagged = []
    starts = []
    peak_cycle = list(_PEAK_LADDER)

    for idx in range(n_starts):
        if idx == 0:
            init, label = np.zeros(grid.n), "zero"
        elif idx == 1:
            m0 = closedform.mu0_series(lam, alpha)[0]
            init = alpha * m0 * closedform.psi0(alpha)(grid.x, grid.y)
            label = "thin-profile"
        elif idx % 2 == 0:
            px, py = _random_admissible_peak(rng, alpha, bm, d)
            mp = peak_cycle[(idx // 2) % len(peak_cycle)]
            try:
                init = mountain_pass_init(grid, 1, d, mp, peaks=[(px, py)])
            except ValueError:
                init = np.zeros(grid.n)
            label = f"bubble({px:.3f},{py:.3f};{mp:g})"
        else:
            init, label = _random_smooth_field(rng, grid), "random-smooth"
        starts.append(label)

        cand = newton_P_deflated(grid, lam, [s.u for s in found], init)
        if cand is None:
            continue
        gaps = [float(np.max(np.abs(cand.u - s.u))) for s in found]
        if gaps and min(gaps) <= _DISTINCT_GAP:
            continue
        found.append(cand)
        frac = concentration_fraction(grid, cand.u)
        if frac >= _CONCENTRATION_FRACTION:
            flagged.append(cand)
            log.info("probe: excluded concentrated state (%.0f%% of mass in "
                     "one patch, sup=%.3g)", 100.0 * frac, cand.sup_norm)
            continue
        if energy(grid, cand.u, lam) <= e_cap:
            kept.append(cand)

    return ProbeResult(count=len(kept), solutions=kept,
                       excluded_concentrated=flagged, seed=seed,
                       starts=starts)
