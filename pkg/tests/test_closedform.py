import math

import numpy as np
import pytest
from scipy.sparse.linalg import spsolve

import mfe.closedform as cf
from mfe.geometry import Disk, Ellipse, build_grid

PI = math.pi


# ---------------------------------------------------------------------------
# profile coefficients
# ---------------------------------------------------------------------------

def test_mu_bar():
    assert cf.mu_bar(0.0) == 0.5
    assert cf.mu_bar(1.0) == 2.0


def test_gamma_plus_thin_limit_value():
    # mu = 1/2 at alpha = 0: (2 - 1/2 - 0)/(1/2 + 4) = 1/3
    assert cf.gamma_plus_sq(0.5, 0.0) == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_gamma_minus_thin_limit_value():
    # mu = 1/2, c = 1, alpha = 0: (1/2 - 2 + 2)/(4 - 1/2) = 1/7
    assert cf.gamma_minus_sq(0.5, 0.0, 1.0) == pytest.approx(1.0 / 7.0, rel=1e-14)


def test_gamma_roundtrip_lattice():
    # g_+-(gamma_+-(mu)) = mu within 1e-10 over a parameter lattice
    mus = np.linspace(0.05, 0.95, 5)      # fractions of mu_bar
    alphas = np.linspace(0.05, 0.95, 5)
    cs = (0.25, 0.7, 1.0)
    checked = 0
    for a in alphas:
        for frac in mus:
            mu = frac * cf.mu_bar(a)
            gp = cf.gamma_plus(mu, a)
            assert cf.g_plus(gp, a) == pytest.approx(mu, abs=1e-10)
            for c in cs:
                gm = cf.gamma_minus(mu, a, c)
                assert cf.g_minus(gm, a, c) == pytest.approx(mu, abs=1e-10)
                assert gm < gp
                checked += 1
    assert checked >= 75


def test_gamma_minus_degenerate_leading_coefficient():
    # 4(1-a^2) - mu c = 0 exactly: the quadratic collapses and the linear
    # fallback must still satisfy the round trip
    alpha, c = 0.9, 0.5
    mu = 4.0 * (1.0 - alpha**2) / c
    assert mu < cf.mu_bar(alpha)
    g = cf.gamma_minus(mu, alpha, c)
    assert cf.g_minus(g, alpha, c) == pytest.approx(mu, abs=1e-10)


def test_gamma_rejects_beyond_fold():
    with pytest.raises(ValueError):
        cf.gamma_plus_sq(0.51, 0.0)
    with pytest.raises(ValueError):
        cf.gamma_minus_sq(2.3, 1.0, 1.0)


def test_gamma_bar_forms_agree():
    for a in np.linspace(0.01, 0.99, 25):
        g2 = cf.gamma_bar_sq(a)  # asserts internally
        assert g2 == pytest.approx(cf.gamma_plus_sq(cf.mu_bar(a), a), abs=1e-11)
    assert cf.gamma_bar_sq(0.0) == pytest.approx(1.0 / 3.0)


def test_gamma_under_below_gamma_bar():
    for a in (0.02, 0.1, 0.5):
        for c in (0.25, 1.0):
            assert cf.gamma_under_sq(a, c) < cf.gamma_bar_sq(a)


# ---------------------------------------------------------------------------
# profile fields
# ---------------------------------------------------------------------------

def test_v_plus_values_and_limits():
    v = cf.v_plus(0.5, 0.0)
    assert v(0.0, 0.0) == pytest.approx(2.0 * math.log(4.0 / 3.0), rel=1e-12)
    # mu -> 0 gives the zero field
    v0 = cf.v_plus(1e-12, 0.3)
    assert abs(v0(0.2, 0.1)) < 1e-10


def test_v_plus_alpha_one_is_disk_solution():
    # at alpha = 1 the profile weight is constant and v_+ is the exact
    # Liouville disk solution with mu = 8 g^2/(1+g^2)^2
    mu = 1.7
    v = cf.v_plus(mu, 1.0)
    g2 = v.gamma_sq
    assert 8.0 * g2 / (1.0 + g2) ** 2 == pytest.approx(mu, rel=1e-12)
    u, mu_d, _ = cf.liouville_disk(math.sqrt(g2))
    xs = np.linspace(-0.9, 0.9, 11)
    assert np.allclose(v(xs, 0.1), u(xs, 0.1), atol=1e-13)
    assert mu_d == pytest.approx(mu, rel=1e-12)


def test_v_minus_piecewise_and_continuity():
    alpha, c = 0.3, 0.49
    v = cf.v_minus(0.4, alpha, c)
    # zero outside the inner ellipse (which reaches x = sqrt(c)/alpha = 2.33)
    assert v(0.0, 0.9) == 0.0
    assert v(3.0, 0.0) == 0.0
    # continuous across q = c (evaluate straddling points)
    y_if = math.sqrt(c)
    assert abs(v(0.0, y_if - 1e-9) - v(0.0, y_if + 1e-9)) < 1e-7


def test_v_minus_below_v_plus_pointwise():
    rng = np.random.default_rng(9)
    for _ in range(12):
        alpha = rng.uniform(0.05, 0.95)
        c = rng.uniform(0.2, 1.0)
        mu = rng.uniform(0.1, 1.0) * cf.mu_bar(alpha)
        vm = cf.v_minus(mu, alpha, c)
        vp = cf.v_plus(mu, alpha)
        x = rng.uniform(-1 / alpha, 1 / alpha, 300)
        y = rng.uniform(-1, 1, 300)
        inside = (alpha * x) ** 2 + y**2 < 1
        assert np.all(vm(x[inside], y[inside]) <= vp(x[inside], y[inside]) + 1e-12)


def test_supersolution_weight_dominates_g_plus():
    rng = np.random.default_rng(4)
    for _ in range(8):
        alpha = rng.uniform(0.05, 1.0)
        gamma = rng.uniform(0.05, 1.5)
        W = cf.supersolution_weight(gamma, alpha)
        x = rng.uniform(-1 / alpha, 1 / alpha, 200)
        y = rng.uniform(-1, 1, 200)
        inside = (alpha * x) ** 2 + y**2 < 1
        assert np.all(W(x[inside], y[inside]) >= cf.g_plus(gamma, alpha) - 1e-13)


def test_profile_discrete_residuals():
    # -Lap v+ >= mu e^{v+} and -Lap v- <= mu e^{v-} (+ documented slack)
    alpha, c = 0.3, 0.6
    mu = 0.9 * cf.mu_bar(alpha)
    g = build_grid(Ellipse(alpha), 160, 56)
    vp = cf.v_plus(mu, alpha)
    up = vp(g.x, g.y)
    res_p = g.A @ up - mu * np.exp(up)
    assert res_p.min() > -2e-3  # O(h^2) truncation only

    vm = cf.v_minus(mu, alpha, c)
    um = vm(g.x, g.y)
    res_m = g.A @ um - mu * np.exp(um)
    q = (alpha * g.x) ** 2 + g.y**2
    away = np.abs(q - c) > 4 * max(g.hx * alpha, g.hy)  # one-cell collar in q
    g2 = vm.gamma_sq
    slack = mu * np.exp(um) * g2 * alpha**2 / (1 + alpha**2 + g2 * (1 - alpha**2))
    assert np.all(res_m[away] <= slack[away] + 2e-3)


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def test_lambda_bounds_ordering_and_disk_value():
    lo, up = cf.lambda_bounds(cf.mu_bar(0.05), 0.05, 1.0)
    assert lo < up
    # at alpha = 1 the upper threshold collapses to 4 pi (< 8 pi)
    assert cf.lambda_upper(1.0) == pytest.approx(4 * PI, rel=1e-14)
    assert cf.lambda_upper(0.999) < 8 * PI


def test_lambda_lower_thin_asymptote():
    # lower * alpha -> 4 pi c/(8 - c)
    for c in (1.0, 0.25):
        target = 4 * PI * c / (8.0 - c)
        val = cf.lambda_lower(1e-4, c) * 1e-4
        assert val == pytest.approx(target, rel=1e-6)


def test_lambda_upper_thin_asymptote():
    # upper * alpha -> 2 pi/3; the often-quoted 11 pi/16 is off by 32/33
    val = cf.lambda_upper(1e-4) * 1e-4
    assert val == pytest.approx(2 * PI / 3, rel=1e-6)
    assert val / (11 * PI / 16) == pytest.approx(32.0 / 33.0, rel=1e-6)


def test_thresholds_decreasing_in_alpha():
    astar = cf.alpha_star_upper()
    grid_a = np.linspace(0.005, astar, 12)
    ups = [cf.lambda_upper(a) for a in grid_a]
    assert np.all(np.diff(ups) < 0)
    astar_l = cf.alpha_star_lower(1.0)
    grid_a = np.linspace(0.005, astar_l, 12)
    los = [cf.lambda_lower(a, 1.0) for a in grid_a]
    assert np.all(np.diff(los) < 0)


def test_alpha_star_roots():
    au = cf.alpha_star_upper()
    assert cf.lambda_upper(au) == pytest.approx(8 * PI, abs=1e-8)
    # frozen root value (the quoted literature window (0.0702, 0.0703) does
    # not contain it; see the acceptance suite)
    assert au == pytest.approx(0.0847372, abs=1e-6)
    al1 = cf.alpha_star_lower(1.0)
    assert cf.lambda_lower(al1, 1.0) == pytest.approx(8 * PI, abs=1e-8)
    assert al1 == pytest.approx(0.0722435, abs=1e-6)
    assert al1 < au < 1 / (2 * math.sqrt(10)) + 0.02
    al_quarter = cf.alpha_star_lower(0.25)
    assert al_quarter == pytest.approx(0.0161, rel=0.05)  # quoted to 3 digits
    assert al_quarter < 1 / (2 * math.sqrt(10))


def test_pohozaev_values():
    assert cf.pohozaev_bound(1.0) == pytest.approx(8 * PI, rel=1e-14)
    assert cf.pohozaev_bound(0.5) == pytest.approx(10 * PI, rel=1e-14)
    assert cf.pohozaev_bound(0.1) == pytest.approx(40.4 * PI, rel=1e-12)
    with pytest.raises(ValueError):
        cf.pohozaev_bound(0.0)


def test_convex_thresholds_asymptotes_and_monotonicity():
    assert cf.n_bar() > 4 * PI
    with pytest.raises(ValueError):
        cf.convex_thresholds(cf.n_bar() - 1.0)
    Ns = [2e3, 1e4, 1e5, 1e6]
    los, ups = zip(*(cf.convex_thresholds(N) for N in Ns))
    assert np.all(np.diff(los) > 0)
    assert np.all(np.diff(ups) > 0)
    # Lambda_lower ~ pi^2 N/496; Lambda_upper ~ 2 sqrt(3) N/pi (the quoted
    # 33 sqrt(3) N/(16 pi) constant carries the same 32/33 slip as above)
    assert los[-1] / (PI**2 * 1e6 / 496) == pytest.approx(1.0, abs=1e-3)
    assert ups[-1] * PI / (2 * math.sqrt(3) * 1e6) == pytest.approx(1.0, abs=1e-4)
    assert ups[-1] / (33 * math.sqrt(3) * 1e6 / (16 * PI)) == pytest.approx(
        32.0 / 33.0, abs=1e-3)


def test_thresholds_report_invariants():
    rep = cf.thresholds_report(0.05, 1.0)
    assert rep.gamma_under_sq < rep.gamma_bar_sq
    assert rep.lambda_lower <= rep.lambda_upper
    assert rep.pohozaev == pytest.approx(4 * PI * 1.0025 / 0.05)
    with pytest.raises(ValueError):
        cf.thresholds_report(1.5)
    with pytest.raises(ValueError):
        cf.thresholds_report(0.5, c=0.0)


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

def test_mu0_series_values():
    m0, d1, d2 = cf.mu0_series(8 * PI, 0.0)
    assert m0 == pytest.approx(8.0, rel=1e-14)
    assert d1 == pytest.approx(1 / PI, rel=1e-14)
    assert d2 == 0.0
    m0, _, _ = cf.mu0_series(8 * PI, 0.02)
    assert m0 == pytest.approx(7.68, rel=1e-12)


def test_series_composition_order():
    # lambda0(mu0(lam)) - lam = O(alpha^2): halving alpha divides it by ~4
    lam = 8 * PI
    res = [abs(cf.lambda0_series(cf.mu0_series(lam, a)[0], a) - lam)
           for a in (0.04, 0.02, 0.01)]
    assert res[0] / res[1] > 3.0
    assert res[1] / res[2] > 3.0


def test_E_hat_series_values_and_roundtrip():
    e, de, dde = cf.E_hat_series(8 * PI, 0.02)
    assert e == pytest.approx(0.02 / (8 * PI) + 0.0004 * 8 * PI / (48 * PI**2),
                              rel=1e-13)
    assert de == pytest.approx(0.0004 / (48 * PI**2), rel=1e-13)
    assert dde == 0.0
    lam_back, slope = cf.lambda_hat_series(e, 0.02)
    assert lam_back == pytest.approx(8 * PI, rel=1e-12)
    assert slope == pytest.approx(48 * PI**2 / 0.0004, rel=1e-13)
    # E at the left endpoint maps to lambda = 0
    assert cf.lambda_hat_series(0.02 / (8 * PI), 0.02)[0] == pytest.approx(0.0, abs=1e-12)


def test_entropy_curvature_leading():
    v = cf.entropy_curvature_leading(0.02)
    assert v == pytest.approx(-528 * PI**2 / 4e-4, rel=1e-14)
    assert v < 0
    # value * alpha^2 is constant
    assert cf.entropy_curvature_leading(0.5) * 0.25 == pytest.approx(
        cf.entropy_curvature_leading(0.1) * 0.01, rel=1e-12)


def test_E_uniform_contract_and_exact():
    assert cf.E_uniform(1.0) == pytest.approx(1 / (8 * PI), rel=1e-14)
    vals = [cf.E_uniform(a) for a in (0.1, 0.3, 0.7, 1.0)]
    assert np.all(np.diff(vals) > 0)
    # exact value carries the 1/(1+a^2) factor; gap is O(alpha^2) relative
    for a in (0.02, 0.1):
        exact = cf.E_uniform_exact(a)
        assert exact == pytest.approx(a / (8 * PI * (1 + a * a)), rel=1e-14)
        assert abs(cf.E_uniform(a) / exact - 1.0) == pytest.approx(a * a, rel=1e-10)


def test_E_uniform_quadrature_consistency():
    # (1/(2|w|^2)) int psi0 on the grid reproduces the exact uniform energy
    alpha = 0.2
    g = build_grid(Ellipse(alpha), 200, 48)
    psi = cf.psi0(alpha)
    val = 0.5 * g.integrate(psi(g.x, g.y)) / g.domain.area**2
    assert val == pytest.approx(cf.E_uniform_exact(alpha), rel=1e-3)  # O(h^2)


def test_psi0_properties():
    alpha = 0.25
    psi = cf.psi0(alpha)
    assert psi(0.0, 0.0) == pytest.approx(1 / (2 * (1 + alpha**2)), rel=1e-14)
    assert psi(1 / alpha, 0.0) == pytest.approx(0.0, abs=1e-14)
    assert psi(0.0, 1.0) == pytest.approx(0.0, abs=1e-14)
    # quadrature of the closed-form integral pi/(4 a (1+a^2)); O(h^2) rule
    g = build_grid(Ellipse(alpha), 240, 60)
    total = g.integrate(psi(g.x, g.y))
    assert total == pytest.approx(PI / (4 * alpha * (1 + alpha**2)), rel=1e-3)
    # -Lap psi0 = 1 to roundoff (psi0 is quadratic and vanishes on the boundary)
    res = g.A @ psi(g.x, g.y)
    assert np.max(np.abs(res - 1.0)) < 1e-9


def test_phi0_is_scaled_psi0():
    lam, alpha = 8 * PI, 0.05
    ph = cf.phi0(lam, alpha)
    ps = cf.psi0(alpha)
    m0 = cf.mu0_series(lam, alpha)[0]
    assert ph(0.3, 0.2) == pytest.approx(m0 * ps(0.3, 0.2), rel=1e-14)


# ---------------------------------------------------------------------------
# exact disk solutions
# ---------------------------------------------------------------------------

def test_liouville_disk_values():
    u, mu, lam = cf.liouville_disk(1.0)
    assert mu == pytest.approx(2.0, rel=1e-14)
    assert lam == pytest.approx(4 * PI, rel=1e-14)
    assert u(0.0, 0.0) == pytest.approx(2 * math.log(2), rel=1e-14)
    assert abs(u(1.0, 0.0)) < 1e-14
    # gamma -> infinity: lam -> 8 pi
    _, _, lam_inf = cf.liouville_disk(1e8)
    assert lam_inf == pytest.approx(8 * PI, rel=1e-10)
    u0, mu0, lam0 = cf.liouville_disk(0.0)
    assert mu0 == 0.0 and lam0 == 0.0
    assert abs(u0(0.3, 0.3)) < 1e-14


def test_liouville_disk_residual_second_order():
    # second order at regular nodes; cut arms only deliver O(h) residual
    # pointwise (solution error stays O(h^2))
    errs = []
    for m in (48, 96):
        g = build_grid(Disk(), m, m)
        u, mu, _ = cf.liouville_disk(1.0)
        vals = u(g.x, g.y)
        regular = np.all(g.theta >= 1.0, axis=1)
        errs.append(np.max(np.abs((g.A @ vals - mu * np.exp(vals))[regular])))
    assert math.log2(errs[0] / errs[1]) > 1.6, errs


def test_disk_energy_entropy_frozen_values():
    assert cf.disk_energy(1.0) == pytest.approx((2 * math.log(2) - 1) / (4 * PI),
                                                rel=1e-13)
    assert cf.disk_entropy(1.0) == pytest.approx(1.0652883441695644, rel=1e-13)
    assert cf.disk_entropy(0.0) == pytest.approx(math.log(PI), rel=1e-14)
    # quadrature cross-check of both functionals at gamma = 0.8
    gam = 0.8
    u, mu, lam = cf.liouville_disk(gam)
    g = build_grid(Disk(), 128, 128)
    vals = u(g.x, g.y)
    I = g.integrate(np.exp(vals))
    assert I == pytest.approx(cf.disk_mass_integral(gam), rel=2e-4)
    delta = np.exp(vals) / I
    E = 0.5 * g.integrate(delta * vals) / lam
    S = -g.integrate(delta * np.log(delta))
    assert E == pytest.approx(cf.disk_energy(gam), rel=2e-4)
    assert S == pytest.approx(cf.disk_entropy(gam), rel=2e-4)


def test_expansion_coeffs_bundle():
    co = cf.expansion_coeffs(8 * PI, 0.02)
    assert co.mu0 == pytest.approx(7.68)
    assert co.lambda_hat == pytest.approx(8 * PI, rel=1e-12)
    assert co.S_curv == pytest.approx(-528 * PI**2 / 4e-4)
