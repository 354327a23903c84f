"""Tests for continuation, entropy curves, the thin-limit expansion, and
multiplicity probes."""

import copy
import functools
import math

import numpy as np
import pytest
from scipy.integrate import quad

import mfe.closedform as cf
from mfe.branch import (
    EntropyCurve,
    continue_branch,
    correction_field,
    cutoff_radius,
    concentration_fraction,
    energy_entropy_along,
    entropy_curvature,
    lambda_from_reduced,
    mountain_pass_init,
    reduced_parameter,
    second_solution,
    uniqueness_probe,
    verify_expansion,
)
from mfe.geometry import Disk, Ellipse, build_grid
from mfe.solver import newton_P
from mfe.solver.functionals import (
    F_lambda,
    delta_of,
    energy,
    free_energy_cvp,
    mass_integral,
)

EIGHT_PI = 8.0 * math.pi


# ---------------------------------------------------------------- fixtures
# branches are the expensive objects here; build each once per session


@functools.lru_cache(maxsize=None)
def disk_fold_branch():
    g = build_grid(Disk(), 96, 96)
    br = continue_branch(g, control="mu", target=2.5, sup_cap=10.0,
                         compute_spectrum=True)
    return g, br


@functools.lru_cache(maxsize=None)
def thin_branch():
    g = build_grid(Ellipse(0.05), 640, 32)
    br = continue_branch(g, control="lambda", target=cf.lambda_lower(0.05),
                         compute_spectrum=True)
    return g, br


@functools.lru_cache(maxsize=None)
def expansion_branch(alpha):
    nx = int(round(32 / alpha))
    g = build_grid(Ellipse(alpha), nx, 32)
    br = continue_branch(g, control="lambda", target=EIGHT_PI)
    return g, br


@functools.lru_cache(maxsize=None)
def thin_minimal_state(lam_over_pi):
    g = build_grid(Ellipse(0.05), 640, 32)
    sol, _ = newton_P(g, lam_over_pi * math.pi)
    return g, sol


# ------------------------------------------------------------ continuation


def test_branch_starts_at_zero_state():
    g, br = thin_branch()
    p0 = br.points[0]
    assert p0.lam == 0.0
    assert p0.sup_norm == 0.0
    # flat state: S = log|domain|, E = uniform-density energy
    assert p0.entropy == pytest.approx(math.log(math.pi / 0.05), abs=5e-3)
    assert p0.energy == pytest.approx(cf.E_uniform_exact(0.05), rel=1e-3)


def test_branch_reaches_lambda_target_exactly():
    g, br = thin_branch()
    assert br.control == "lambda"
    assert not br.truncated
    assert br.fold_indices == []
    assert len(br) >= 7
    assert br.points[-1].lam == pytest.approx(cf.lambda_lower(0.05), rel=1e-9)


def test_branch_mass_invariant_everywhere():
    for g, br in (thin_branch(), disk_fold_branch()):
        for p in br.points[1:]:
            lam_of = p.mu * mass_integral(g, p.u)
            assert abs(p.lam - lam_of) <= 1e-8 * (1.0 + abs(p.lam))


def test_branch_duality_along():
    # convex-dual free energy agrees with -F_lambda/lambda^2 at solutions
    g, br = thin_branch()
    for p in br.points:
        if p.lam <= 0.0:
            continue
        lhs = free_energy_cvp(g, delta_of(g, p.u), -p.lam)
        rhs = -p.F_lambda / p.lam**2
        assert abs(lhs - rhs) <= 1e-6 * (1.0 + abs(rhs))


def test_branch_minimal_arc_is_stable():
    g, br = thin_branch()
    taus = br.column("tau1")
    nus = br.column("nu0")
    assert np.all(taus > 0.0)
    assert np.all(nus > 0.0)
    # energy grows monotonically with lambda on the minimal arc
    E = br.column("energy")
    assert np.all(np.diff(E) > 0.0)


def test_disk_fold_detection():
    g, br = disk_fold_branch()
    assert br.fold_indices, "no fold flagged on the disk branch"
    k = br.fold_indices[0]
    assert br.points[k].fold_flag
    lo, hi = br.fold_bracket
    assert lo < br.fold_param < hi
    # continuum fold of the exponential-source disk problem sits at mu = 2
    assert br.fold_param == pytest.approx(2.0, rel=2e-2)
    assert lo <= 2.0 <= hi


def test_disk_fold_nu0_sign_change():
    # the unnormalized-pencil ground eigenvalue changes sign across the fold
    g, br = disk_fold_branch()
    lo, hi = br.fold_bracket
    nus = br.column("nu0")
    mus = br.column("mu")
    crossings = [
        i for i in range(len(nus) - 1)
        if nus[i] * nus[i + 1] < 0.0
        and lo <= mus[i] <= hi and lo <= mus[i + 1] <= hi
    ]
    assert crossings, "nu0 does not cross zero inside the fold bracket"


def test_disk_branch_lambda_cap_and_parametrization():
    g, br = disk_fold_branch()
    lams = br.column("lam")
    assert np.max(lams) <= EIGHT_PI * 1.01
    # closed-form disk family: sup = 2 log(1+gamma^2), lam = 8 pi g2/(1+g2);
    # checked on resolved profiles (the sup ~ 10 tail is spike-limited at h)
    for p in br.points:
        if not 0.2 <= p.sup_norm <= 6.0:
            continue
        g2 = math.exp(p.sup_norm / 2.0) - 1.0
        lam_pred = EIGHT_PI * g2 / (1.0 + g2)
        assert p.lam == pytest.approx(lam_pred, rel=1e-2)


def test_branch_truncation_reports_diagnostic():
    g = build_grid(Disk(), 48, 48)
    br = continue_branch(g, control="mu", target=5.0, sup_cap=6.0)
    assert br.truncated
    assert br.diagnostic != ""
    assert np.max(br.column("mu")) < 5.0
    assert br.fold_indices  # the fold is still found on the way


def test_branch_arclength_budget():
    g = build_grid(Ellipse(0.1), 160, 24)
    br = continue_branch(g, control="lambda", arclength=0.8)
    assert len(br) >= 2
    assert not br.truncated
    assert sum(br.steps) <= 0.8 + br.steps[-1] + 1e-12


def test_branch_column_accessor():
    g, br = thin_branch()
    lams = br.column("lam")
    assert isinstance(lams, np.ndarray)
    assert len(lams) == len(br) == len(br.points)
    with pytest.raises(AttributeError):
        br.column("no_such_field")


# ---------------------------------------------------------- entropy curve


def test_entropy_curve_shape_and_slope():
    g, br = thin_branch()
    cv = energy_entropy_along(br)
    assert np.all(np.diff(cv.E_grid) > 0.0)
    assert cv.S_grid[0] > cv.S_grid[-1]
    # caloric slope dS/dE = -lambda along the curve
    m = len(cv.E_grid) // 2
    slope = (cv.S_grid[m + 1] - cv.S_grid[m - 1]) / (cv.E_grid[m + 1] - cv.E_grid[m - 1])
    assert slope == pytest.approx(-cv.lam_grid[m], rel=2e-2)
    # endpoints of the second-difference column are not defined
    assert math.isnan(cv.d2S_dE2[0]) and math.isnan(cv.d2S_dE2[-1])


def test_entropy_curvature_thermodynamic_scale():
    # d2S/dE2 = -1/(dE/dlambda) ~ -48 pi^2/alpha^2 at leading order for the
    # measured energy coefficient; the midpoint value lands on that scale
    g, br = thin_branch()
    c = entropy_curvature(energy_entropy_along(br))
    ratio = c / (-48.0 * math.pi**2 / 0.05**2)
    assert c < 0.0
    assert 0.65 < ratio < 1.35


def test_entropy_identity_violation_raises():
    g, br = thin_branch()
    bad = copy.deepcopy(br)
    bad.points[3].entropy += 1e-3
    with pytest.raises(RuntimeError):
        energy_entropy_along(bad)


def test_entropy_curvature_input_validation():
    E = np.linspace(0.0, 1.0, 5)
    flat = EntropyCurve(E=E, S=-E**2, lam=2 * E, E_grid=E, S_grid=-E**2,
                        lam_grid=2 * E, d2S_dE2=np.zeros(5), alpha=0.1)
    with pytest.raises(ValueError):
        entropy_curvature(flat)
    E = np.array([0.0, 0.1, 0.05, 0.2, 0.3, 0.4, 0.5])
    bent = EntropyCurve(E=E, S=-E, lam=E, E_grid=E, S_grid=-E,
                        lam_grid=E, d2S_dE2=np.zeros(7), alpha=0.1)
    with pytest.raises(ValueError):
        entropy_curvature(bent)


# -------------------------------------------------------------- expansion


def test_verify_expansion_remainder_order():
    reps = {}
    for alpha in (0.04, 0.02):
        g, br = expansion_branch(alpha)
        reps[alpha] = verify_expansion(alpha, EIGHT_PI, br)
    order = math.log2(reps[0.04]["r"] / reps[0.02]["r"])
    assert order >= 2.5
    for alpha, rep in reps.items():
        assert rep["mu0_solver"] == pytest.approx(rep["mu0_series"], rel=1e-3)
        assert rep["phi1_integral"] == pytest.approx(
            rep["phi1_integral_exact"], rel=1e-2)
    # center value converges to its thin-limit prediction linearly in alpha
    err = {a: abs(r["center_over_alpha"] / r["center_predicted"] - 1.0)
           for a, r in reps.items()}
    assert err[0.02] < 0.1
    assert err[0.02] <= 0.6 * err[0.04]


def test_reduced_parameter_roundtrip():
    g, _ = expansion_branch(0.04)
    mu0 = 2.0
    lam0, sol = lambda_from_reduced(g, mu0)
    assert reduced_parameter(g, sol.u, lam0) == pytest.approx(mu0, rel=1e-12)


def test_lambda_from_reduced_series_order():
    mu0 = 2.0
    errs = {}
    for alpha in (0.04, 0.02):
        g, _ = expansion_branch(alpha)
        lam0, _sol = lambda_from_reduced(g, mu0)
        errs[alpha] = abs(lam0 - math.pi * mu0 - math.pi * mu0**2 * alpha / 4)
    assert math.log2(errs[0.04] / errs[0.02]) >= 1.5


def test_correction_field_integral_value():
    g, br = expansion_branch(0.04)
    rep = verify_expansion(0.04, EIGHT_PI, br)
    mu0 = rep["mu0_solver"]
    phi1 = correction_field(g, mu0)
    alpha = 0.04
    exact = math.pi * mu0**2 * alpha / (12.0 * (1.0 + alpha**2) ** 2)
    assert alpha**2 * float(g.w @ phi1) == pytest.approx(exact, rel=5e-2)


def test_verify_expansion_validates_inputs():
    g, br = expansion_branch(0.04)
    with pytest.raises(ValueError):
        verify_expansion(0.02, EIGHT_PI, br)       # wrong half-width
    with pytest.raises(ValueError):
        verify_expansion(0.04, 7.7 * math.pi, br)  # lambda not on the branch


# ------------------------------------------------------------ multiplicity


def test_cutoff_radius_profile():
    d = 0.3
    t = np.linspace(0.0, 4 * d, 4001)
    chi = cutoff_radius(t, d)
    assert np.allclose(chi[t <= d], t[t <= d])
    assert np.allclose(chi[t >= 2 * d], 2 * d)
    assert np.all(np.diff(chi) >= -1e-12)
    # C^1 joints: slope 1 entering the blend, slope 0 leaving it
    e = 1e-6
    for t0, s0 in ((d, 1.0), (2 * d, 0.0)):
        slope = (cutoff_radius(t0 + e, d) - cutoff_radius(t0 - e, d)) / (2 * e)
        assert slope == pytest.approx(s0, abs=1e-4)


def test_bubble_field_shape():
    g, _ = thin_minimal_state(9)
    u = mountain_pass_init(g, 1, 0.35, 10.0)
    assert np.min(u) >= 0.0
    # peak sits at the node nearest the origin
    k = int(np.argmax(u))
    assert abs(g.x[k]) <= g.hx and abs(g.y[k]) <= g.hy
    # vanishes outside the inscribed reference ellipse
    outside = 0.05**2 * g.x**2 + g.y**2 > 1.0
    assert np.all(u[outside] == 0.0)


def test_bubble_peak_validation():
    g = build_grid(Disk(), 64, 64)
    u2 = mountain_pass_init(g, 2, 0.1, 10.0)
    assert np.max(u2) > 0.0
    with pytest.raises(ValueError):
        mountain_pass_init(g, 1, 0.1, 10.0, peaks=[(0.99, 0.0)])
    with pytest.raises(ValueError):
        mountain_pass_init(g, 2, 0.1, 10.0, peaks=[(0.0, 0.0), (0.2, 0.0)])
    with pytest.raises(ValueError):
        mountain_pass_init(g, 1, 0.1, 10.0, peaks=[(1.5, 0.0)])


def _bubble_functional_radial(mu, d, lam, area):
    # continuum value of the free functional on a centered single bubble,
    # via radial quadrature (independent of the 2-d grid)
    def chi(t):
        return float(cutoff_radius(t, d))

    def dchi(t):
        e = 1e-7
        return (chi(t + e) - chi(t - e)) / (2 * e)

    def gradsq(r):
        c = chi(r)
        up = -4 * mu * mu * c * dchi(r) / (1 + mu * mu * c * c)
        return up * up * 2 * math.pi * r

    pts = [d, 2 * d, 1 / mu]
    dir_half = 0.5 * quad(gradsq, 0.0, 2 * d, limit=400, points=pts)[0]
    norm = (1 + 4 * d * d * mu * mu) ** 2

    def e_u(r):
        c = chi(r)
        return norm / (1 + mu * mu * c * c) ** 2 * 2 * math.pi * r

    mass = quad(e_u, 0.0, 2 * d, limit=400, points=pts)[0] \
        + (area - math.pi * (2 * d) ** 2)
    return dir_half - lam * math.log(mass)


def test_bubble_functional_decreases_in_peak_sharpness():
    # above the quantization level the functional of the one-bubble family
    # decreases in mu_peak, with increments approaching (16 pi - 2 lam) per
    # log unit; grid evaluation matches while the core is resolved
    lam = 9.0 * math.pi
    d = 0.35
    F = [_bubble_functional_radial(m, d, lam, math.pi)
         for m in (10.0, 100.0, 1000.0)]
    assert F[0] > F[1] > F[2]
    pred = (16.0 * math.pi - 2.0 * lam) * math.log(10.0)
    assert F[2] - F[1] == pytest.approx(pred, rel=0.25)
    g = build_grid(Disk(), 192, 192)
    Fg = F_lambda(g, mountain_pass_init(g, 1, d, 10.0), lam)
    assert Fg == pytest.approx(F[0], abs=1.0)


def test_second_solution_above_quantization():
    g, u_min = thin_minimal_state(9)
    lam = 9.0 * math.pi
    sol = second_solution(g, lam, u_min.u)
    assert sol is not None
    assert sol.sup_norm > u_min.sup_norm + 1.0
    assert F_lambda(g, sol.u, lam) > F_lambda(g, u_min.u, lam)
    assert concentration_fraction(g, sol.u) < 0.5


def test_second_solution_below_quantization_is_none():
    g, u_min = thin_minimal_state(4)
    assert second_solution(g, 4.0 * math.pi, u_min.u) is None


def test_uniqueness_probe_below_quantization():
    g, _ = thin_minimal_state(4)
    pr = uniqueness_probe(g, 4.0 * math.pi, n_starts=20, seed=42)
    assert pr.count == 1
    assert len(pr.excluded_concentrated) == 0
    assert len(pr.starts) == 20
    assert pr.solutions[0].sup_norm < 0.5
    # deterministic under the same seed
    again = uniqueness_probe(g, 4.0 * math.pi, n_starts=20, seed=42)
    assert [s.sup_norm for s in again.solutions] == \
        [s.sup_norm for s in pr.solutions]


def test_uniqueness_probe_flags_spike_artifacts():
    g, _ = thin_minimal_state(9)
    pr = uniqueness_probe(g, 9.0 * math.pi, n_starts=20, seed=42)
    assert pr.count == 1
    assert pr.solutions[0].sup_norm < 0.5
    assert len(pr.excluded_concentrated) >= 1
    for s in pr.excluded_concentrated:
        assert concentration_fraction(g, s.u) >= 0.5
        assert s.sup_norm > 5.0


def test_concentration_fraction_extremes():
    g, _ = thin_minimal_state(4)
    assert concentration_fraction(g, np.zeros(g.n)) < 0.01
    spike = np.zeros(g.n)
    spike[int(np.argmin(g.x**2 + g.y**2))] = 40.0
    assert concentration_fraction(g, spike) > 0.9
