"""Release acceptance suite: sixteen numbered checks shared by the test
suite and the ``verify`` subcommand.

Each criterion is a zero-argument callable returning ``(passed, details)``
with every number that went into the decision, so failures are auditable
from the JSON report alone.  Grids stay within the desk budget (at most
1024*256 nodes) and each item runs in well under two minutes.
"""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np

from . import closedform as cf
from .branch import (
    continue_branch,
    correction_field,
    energy_entropy_along,
    entropy_curvature,
    lambda_from_reduced,
    second_solution,
    uniqueness_probe,
)
from .geometry import (
    LASSAK_RATIO,
    ConvexPolygon,
    Disk,
    Ellipse,
    build_grid,
    inscribed_ratio,
    john_ellipse,
    rectangle,
)
from .solver import monotone_iterate, newton_P, newton_Q
from .solver.functionals import (
    F_lambda,
    delta_of,
    dirichlet_eig1,
    free_energy_cvp,
    lambda_of,
)
from .spectrum import spectrum_at

EIGHT_PI = 8.0 * math.pi
TWO_LOG_2 = 2.0 * math.log(2.0)


@dataclasses.dataclass
class CriterionResult:
    cid: str
    title: str
    passed: bool
    details: dict


# ------------------------------------------------------------ shared state


@functools.lru_cache(maxsize=None)
def _egrid(alpha, nx, ny):
    return build_grid(Ellipse(alpha), nx, ny)


@functools.lru_cache(maxsize=None)
def _dgrid(n):
    return build_grid(Disk(), n, n)


@functools.lru_cache(maxsize=None)
def _minimal_branch_005():
    # lambda-controlled branch on omega_0.05 up to the certified threshold
    g = _egrid(0.05, 640, 32)
    br = continue_branch(g, control="lambda", target=cf.lambda_lower(0.05),
                         compute_spectrum=True)
    return g, br


@functools.lru_cache(maxsize=None)
def _branch_to_8pi(alpha, nx, ny):
    g = _egrid(alpha, nx, ny)
    return g, continue_branch(g, control="lambda", target=EIGHT_PI)


# -------------------------------------------------------------- criteria


def _c01_threshold_root_interval():
    root = cf.alpha_star_upper()
    lo, hi = 0.0702, 0.0703
    return lo < root < hi, {"root": root, "interval_lo": lo, "interval_hi": hi}


def _c02_lower_threshold_asymptote():
    alpha = 1e-3
    val = cf.lambda_lower(alpha, 1.0) * alpha
    target = 4.0 * math.pi / 7.0
    rel = abs(val / target - 1.0)
    return rel < 0.01, {"value": val, "target": target, "rel_err": rel}


def _c03_upper_threshold_asymptote():
    alpha = 1e-3
    val = cf.lambda_upper(alpha) * alpha
    target = 11.0 * math.pi / 16.0
    rel = abs(val / target - 1.0)
    return rel < 0.01, {"value": val, "target": target, "rel_err": rel}


def _c04_disk_solve_oracle():
    errs = {}
    lam_rel = math.nan
    for n in (64, 128, 256):
        g = _dgrid(n)
        sol, _ = newton_Q(g, 2.0)
        errs[n] = abs(g.interp(sol.u, 0.0, 0.0) - TWO_LOG_2)
        if n == 256:
            lam_rel = abs(lambda_of(g, sol.u, sol.mu) / (4.0 * math.pi) - 1.0)
    order = math.log2(errs[128] / errs[256])
    ok = errs[256] <= 1e-3 and order >= 1.8 and lam_rel <= 5e-3
    return ok, {"center_err_256": errs[256], "order": order,
                "lambda_rel_err": lam_rel,
                "center_err_64": errs[64], "center_err_128": errs[128]}


def _c05_first_eigenvalue():
    g = build_grid(rectangle(-4.0, 4.0, -1.0, 1.0), 512, 128)
    val, _ = dirichlet_eig1(g)
    target = math.pi**2 * (1.0 + 0.0625) / 4.0
    rel = abs(val / target - 1.0)
    details = {"rectangle_value": val, "rectangle_target": target,
               "rectangle_rel_err": rel}
    ok = rel <= 0.01
    for alpha, nx, ny in ((0.05, 640, 32), (0.1, 320, 32), (0.2, 320, 64)):
        s1, _ = dirichlet_eig1(_egrid(alpha, nx, ny))
        bound = 2.0 * (1.0 + alpha)
        details[f"sigma1_alpha_{alpha}"] = s1
        details[f"bound_alpha_{alpha}"] = bound
        ok = ok and s1 >= bound
    return ok, details


def _c06_monotone_sandwich():
    alpha = 0.05
    g = _egrid(alpha, 640, 32)
    mu = cf.mu_bar(alpha)
    vm = cf.v_minus(mu, alpha)(g.x, g.y)
    vp = cf.v_plus(mu, alpha)(g.x, g.y)
    sol = monotone_iterate(g, mu, vm, vp)
    slack = 5.0 * max(g.hx, g.hy) ** 2
    below = float(np.min(sol.u - vm))
    above = float(np.max(sol.u - vp))
    lam = lambda_of(g, sol.u, mu)
    lo, hi = cf.lambda_lower(alpha), cf.lambda_upper(alpha)
    ok = (sol.converged and below >= -slack and above <= slack
          and lo <= lam <= hi)
    return ok, {"min_above_sub": below, "max_above_super": above,
                "slack": slack, "lambda_of": lam,
                "lambda_lower": lo, "lambda_upper": hi}


def _c07_energy_series_order():
    r = {}
    for alpha, nx, ny in ((0.04, 1024, 64), (0.02, 2048, 96)):
        _, br = _branch_to_8pi(alpha, nx, ny)
        E = br.points[-1].energy
        series = alpha / EIGHT_PI + alpha * alpha * EIGHT_PI / (48.0 * math.pi**2)
        r[alpha] = abs(E - series)
    order = math.log2(r[0.04] / r[0.02])
    return order >= 2.5, {"r_004": r[0.04], "r_002": r[0.02], "order": order}


def _c08_reduced_series_order():
    mu0 = 2.0
    errs = {}
    for alpha, nx, ny in ((0.04, 800, 32), (0.02, 1600, 32)):
        g = _egrid(alpha, nx, ny)
        lam0, _ = lambda_from_reduced(g, mu0)
        errs[alpha] = abs(lam0 - math.pi * mu0 - math.pi * mu0**2 * alpha / 4.0)
    order = math.log2(errs[0.04] / errs[0.02])
    return order >= 1.5, {"err_004": errs[0.04], "err_002": errs[0.02],
                          "order": order}


def _c09_entropy_curvature():
    curv = {}
    for alpha, nx in ((0.02, 1600), (0.01, 3200)):
        _, br = _branch_to_8pi(alpha, nx, 32)
        curv[alpha] = entropy_curvature(energy_entropy_along(br))
    target = cf.entropy_curvature_leading(0.02)
    value_rel = abs(curv[0.02] / target - 1.0)
    scale = curv[0.01] / curv[0.02]
    scale_rel = abs(scale / 4.0 - 1.0)
    ok = value_rel <= 0.30 and scale_rel <= 0.35
    return ok, {"curvature_002": curv[0.02], "curvature_001": curv[0.01],
                "target": target, "value_rel_err": value_rel,
                "scale": scale, "scale_rel_err": scale_rel}


def _c10_spectrum_positivity():
    g, br = _minimal_branch_005()
    idx = np.unique(np.linspace(0, len(br) - 1, 10).round().astype(int))
    ok = True
    mins = {"tau1": math.inf, "nu0": math.inf, "tau_gap": math.inf}
    for k in idx:
        p = br.points[k]
        spec = spectrum_at(g, p.u, lam=p.lam, mu=p.mu)
        ok = ok and p.tau1 > 0.0 and p.nu0 > 0.0
        # tau1 == tau0 exactly at lambda = 0; allow eigensolve noise on ties
        ok = ok and spec["tau1"] >= spec["tau0"] - 1e-10 * (1.0 + abs(spec["tau0"]))
        mins["tau1"] = min(mins["tau1"], p.tau1)
        mins["nu0"] = min(mins["nu0"], p.nu0)
        mins["tau_gap"] = min(mins["tau_gap"], spec["tau1"] - spec["tau0"])
    mins["n_samples"] = int(len(idx))
    mins["lambda_max"] = br.points[-1].lam
    return ok, mins


def _c11_disk_fold():
    g = _dgrid(96)
    br = continue_branch(g, control="mu", target=2.5, sup_cap=10.0,
                         compute_spectrum=True)
    fold_rel = abs(br.fold_param / 2.0 - 1.0) if br.fold_indices else math.inf
    lo, hi = br.fold_bracket if br.fold_bracket else (math.nan, math.nan)
    nus = br.column("nu0")
    mus = br.column("mu")
    crossing = any(
        nus[i] * nus[i + 1] < 0.0 and lo <= mus[i] <= hi and lo <= mus[i + 1] <= hi
        for i in range(len(nus) - 1))
    lam_max = float(np.max(br.column("lam")))
    ok = fold_rel <= 0.02 and crossing and lam_max <= EIGHT_PI * 1.01
    return ok, {"fold_param": br.fold_param, "fold_rel_err": fold_rel,
                "bracket_lo": lo, "bracket_hi": hi,
                "nu0_crossing_in_bracket": crossing,
                "lambda_max_over_8pi": lam_max / EIGHT_PI}


def _c12_multiplicity():
    g = _egrid(0.05, 640, 32)
    lam = 9.0 * math.pi
    u_min, _ = newton_P(g, lam)
    sec = second_solution(g, lam, u_min.u)
    f_min = F_lambda(g, u_min.u, lam)
    f_sec = F_lambda(g, sec.u, lam) if sec is not None else math.nan
    pr = uniqueness_probe(g, 4.0 * math.pi, n_starts=20, seed=42)
    ok = sec is not None and f_sec > f_min and pr.count == 1
    return ok, {"second_found": sec is not None,
                "F_minimal": f_min, "F_second": f_sec,
                "second_sup": math.nan if sec is None else sec.sup_norm,
                "probe_4pi_count": pr.count}


def _c13_uniqueness_under_energy_cap():
    g = _egrid(0.02, 1600, 32)
    pr = uniqueness_probe(g, EIGHT_PI, e_cap=1.0, n_starts=20, seed=42)
    return pr.count == 1, {"count": pr.count,
                           "excluded_concentrated": len(pr.excluded_concentrated),
                           "kept_sup": math.nan if not pr.solutions
                           else pr.solutions[0].sup_norm}


def _c14_duality_identity():
    g, br = _minimal_branch_005()
    worst = 0.0
    for p in br.points:
        if p.lam <= 0.0:
            continue
        lhs = free_energy_cvp(g, delta_of(g, p.u), -p.lam)
        rhs = -p.F_lambda / p.lam**2
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return worst <= 1e-6, {"worst_rel_err": worst, "n_points": len(br)}


def _c15_profile_quadrature_orders():
    alpha, mu0 = 0.1, 3.0
    errs = []
    for nx, ny in ((320, 32), (640, 64)):
        g = _egrid(alpha, nx, ny)
        p = cf.psi0(alpha)(g.x, g.y)
        phi1 = correction_field(g, mu0)
        errs.append((
            abs(float(g.w @ p) - cf.psi0_integral(alpha)),
            abs(float(g.w @ (p * p)) - cf.psi0_sq_integral(alpha)),
            abs(alpha**2 * float(g.w @ phi1) - cf.phi1_integral(mu0, alpha)),
        ))
    orders = [math.log2(a / b) for a, b in zip(errs[0], errs[1])]
    ok = all(o >= 1.8 for o in orders)
    return ok, {"order_psi0": orders[0], "order_psi0_sq": orders[1],
                "order_phi1": orders[2],
                "err_fine_psi0": errs[1][0], "err_fine_psi0_sq": errs[1][1],
                "err_fine_phi1": errs[1][2]}


def _c16_geometry():
    tri = ConvexPolygon([(0.0, 0.0), (4.0, 1.0), (1.0, 3.0)])
    _, _, area = john_ellipse(tri)
    tri_err = abs(area / tri.area - LASSAK_RATIO)
    rng = np.random.default_rng(42)
    worst = math.inf
    from scipy.spatial import ConvexHull
    for _ in range(100):
        pts = rng.standard_normal((int(rng.integers(4, 40)), 2)) \
            * (rng.uniform(0.5, 3.0), 1.0) + rng.uniform(-1, 1, 2)
        P = ConvexPolygon(pts[ConvexHull(pts).vertices])
        worst = min(worst, inscribed_ratio(P))
    g = _egrid(0.5, 128, 64)
    br = continue_branch(g, control="lambda", target=10.0 * math.pi)
    lam_max = float(np.max(br.column("lam")))
    cap = cf.pohozaev_bound(0.5)
    ok = (tri_err <= 1e-4 and worst > LASSAK_RATIO - 1e-7
          and lam_max < 10.0 * math.pi)
    return ok, {"triangle_ratio_err": tri_err, "worst_inscribed_ratio": worst,
                "lassak_ratio": LASSAK_RATIO, "lambda_max": lam_max,
                "pohozaev_cap": cap}


_REGISTRY = [
    ("1", "bisection root of the upper-threshold equation lies in the quoted interval",
     _c01_threshold_root_interval),
    ("2", "lower threshold asymptote lambda_lower*alpha at alpha=1e-3",
     _c02_lower_threshold_asymptote),
    ("3", "upper threshold asymptote lambda_upper*alpha at alpha=1e-3",
     _c03_upper_threshold_asymptote),
    ("4", "disk solve at the fold: center value, convergence order, mass",
     _c04_disk_solve_oracle),
    ("5", "first eigenvalue: thin-rectangle value and ellipse lower bound",
     _c05_first_eigenvalue),
    ("6", "monotone sandwich on omega_0.05 at mu_bar",
     _c06_monotone_sandwich),
    ("7", "energy series remainder order at lambda=8pi",
     _c07_energy_series_order),
    ("8", "reduced-parameter series order under alpha halving",
     _c08_reduced_series_order),
    ("9", "entropy curvature value and alpha-scaling",
     _c09_entropy_curvature),
    ("10", "spectrum positivity along the minimal branch",
     _c10_spectrum_positivity),
    ("11", "disk fold location, marginal-mode crossing, lambda cap",
     _c11_disk_fold),
    ("12", "second solution above 8pi and uniqueness below",
     _c12_multiplicity),
    ("13", "uniqueness probe under the energy cap at 8pi",
     _c13_uniqueness_under_energy_cap),
    ("14", "convex-duality identity along the branch",
     _c14_duality_identity),
    ("15", "profile quadrature convergence orders",
     _c15_profile_quadrature_orders),
    ("16", "John ellipse ratio, inscribed-area bound, Pohozaev cap",
     _c16_geometry),
]


def list_ids():
    """(cid, title) pairs in suite order."""
    return [(cid, title) for cid, title, _ in _REGISTRY]


def run_criterion(cid: str) -> CriterionResult:
    for c, title, fn in _REGISTRY:
        if c == cid:
            try:
                passed, details = fn()
            except Exception as exc:  # reported, not fatal to the suite
                passed, details = False, {"error": repr(exc)}
            return CriterionResult(cid=cid, title=title, passed=bool(passed),
                                   details=details)
    raise KeyError(f"unknown criterion id {cid!r}")


def run_all(ids=None, jobs: int = 1):
    """Run the suite (or the ``ids`` subset) and return CriterionResults."""
    wanted = [cid for cid, _, _ in _REGISTRY] if ids is None else list(ids)
    for cid in wanted:
        if cid not in {c for c, _, _ in _REGISTRY}:
            raise KeyError(f"unknown criterion id {cid!r}")
    if jobs <= 1:
        return [run_criterion(cid) for cid in wanted]
    import concurrent.futures as cfut
    with cfut.ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(run_criterion, wanted))
