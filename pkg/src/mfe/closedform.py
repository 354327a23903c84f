"""Closed-form machinery for the mean field problem on thin ellipses.

Everything here is exact arithmetic on explicit formulas: the one-parameter
Liouville-type profile families that serve as super/subsolutions on
omega_alpha = {alpha^2 x^2 + y^2 <= 1}, the existence thresholds they
generate, the small-alpha series of the branch, and the exact disk
solutions used as oracles everywhere else in the package.

Conventions.  `mu` is the coefficient of the unnormalized problem
-Lap u = mu e^u, and `lambda` the mass of the normalized problem
-Lap u = lam e^u / int e^u, related by lam = mu * int e^u.  Profiles are
parameterized by gamma > 0 through

    v_gamma(x, y) = 2 log( (1 + gamma^2) / (1 + gamma^2 q) ),
    q(x, y) = alpha^2 x^2 + y^2,

which vanishes on the boundary q = 1.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# profile families and their matched coefficients
# ---------------------------------------------------------------------------

def mu_bar(alpha: float) -> float:
    """Largest mu for which the supersolution family exists: (1+a^2)^2/2."""
    return 0.5 * (1.0 + alpha * alpha) ** 2


def g_plus(gamma: float, alpha: float) -> float:
    """Coefficient matched by the outer profile: a lower bound for the
    pointwise weight of v_gamma, so -Lap v >= g_plus * e^v on omega_alpha."""
    g2 = gamma * gamma
    return (4.0 * g2 / (1.0 + g2) ** 2) * (1.0 + alpha**2 + g2 * (alpha**2 - 1.0))


def g_minus(gamma: float, alpha: float, c: float) -> float:
    """Coefficient matched by the inner profile scaled to {q <= c}."""
    g2 = gamma * gamma
    return (4.0 * g2 / (c * (1.0 + g2) ** 2)) * (1.0 + alpha**2 + g2 * (1.0 - alpha**2))


def gamma_plus_sq(mu: float, alpha: float) -> float:
    """Smaller root of g_plus(gamma) = mu (exists iff mu <= mu_bar)."""
    a2 = alpha * alpha
    disc = (1.0 + a2) ** 2 - 2.0 * mu
    if disc < -1e-14:
        raise ValueError(f"mu={mu} exceeds mu_bar={mu_bar(alpha)}: no supersolution")
    disc = max(disc, 0.0)
    return (2.0 * (1.0 + a2) - mu - 2.0 * math.sqrt(disc)) / (mu + 4.0 * (1.0 - a2))


def gamma_minus_sq(mu: float, alpha: float, c: float = 1.0) -> float:
    """Positive root of g_minus(gamma) = mu.

    The quadratic's leading coefficient 4(1-a^2) - mu*c can vanish (thick
    domains); the root is then the removable limit of the usual formula and
    we fall back to the linear equation.
    """
    a2 = alpha * alpha
    mc = mu * c
    disc = (1.0 + a2) ** 2 - 2.0 * a2 * mc
    if disc < -1e-14:
        raise ValueError(f"mu={mu} exceeds mu_bar={mu_bar(alpha)}: no subsolution")
    disc = max(disc, 0.0)
    lead = 4.0 * (1.0 - a2) - mc
    if abs(lead) < 4e-12:
        return mc / (4.0 * (1.0 + a2) - 2.0 * mc)
    return (mc - 2.0 * (1.0 + a2) + 2.0 * math.sqrt(disc)) / lead


def gamma_plus(mu: float, alpha: float) -> float:
    return math.sqrt(max(0.0, gamma_plus_sq(mu, alpha)))


def gamma_minus(mu: float, alpha: float, c: float = 1.0) -> float:
    return math.sqrt(max(0.0, gamma_minus_sq(mu, alpha, c)))


def gamma_bar_sq(alpha: float) -> float:
    """gamma_plus^2 at the fold mu = mu_bar; canonical form (1+a^2)/(3-a^2).

    The substituted form (1+a^2)(3-a^2) / (8(1-a^2)+(1+a^2)^2) is the same
    rational function (the denominators agree identically); asserted here.
    """
    a2 = alpha * alpha
    canonical = (1.0 + a2) / (3.0 - a2)
    substituted = (1.0 + a2) * (3.0 - a2) / (8.0 * (1.0 - a2) + (1.0 + a2) ** 2)
    assert abs(canonical - substituted) <= 1e-12 * canonical
    return canonical


def gamma_under_sq(alpha: float, c: float = 1.0) -> float:
    """gamma_minus^2 at mu = mu_bar."""
    return gamma_minus_sq(mu_bar(alpha), alpha, c)


def q_form(alpha: float):
    """The defining quadratic q(x,y) = alpha^2 x^2 + y^2 of omega_alpha."""
    a2 = alpha * alpha

    def q(x, y):
        return a2 * x * x + y * y

    return q


def v_plus(mu: float, alpha: float):
    """Supersolution field for -Lap u = mu e^u on omega_alpha (mu <= mu_bar)."""
    g2 = gamma_plus_sq(mu, alpha)
    q = q_form(alpha)

    def v(x, y):
        return 2.0 * np.log((1.0 + g2) / (1.0 + g2 * q(x, y)))

    v.gamma_sq = g2
    return v


def v_minus(mu: float, alpha: float, c: float = 1.0):
    """Subsolution field: inner profile on {q <= c}, zero outside.

    Only C^0 across the interface q = c.  Note the matched coefficient
    bounds the profile's weight up to an O(alpha^2 gamma^2) excess near the
    inner tips, so discrete residual checks need that slack.
    """
    g2 = gamma_minus_sq(mu, alpha, c)
    q = q_form(alpha)

    def v(x, y):
        qq = q(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        inner = 2.0 * np.log((1.0 + g2) / (1.0 + g2 * np.minimum(qq, c) / c))
        return np.where(qq <= c, inner, 0.0)

    v.gamma_sq = g2
    return v


def supersolution_weight(gamma: float, alpha: float):
    """Pointwise weight W with -Lap v_gamma = W e^{v_gamma}:

        W(x,y) = (4 g^2/(1+g^2)^2) * ((1+a^2) + g^2 a^2 (x^2+y^2)),

    which dominates g_plus(gamma, alpha) everywhere on omega_alpha."""
    g2 = gamma * gamma
    pref = 4.0 * g2 / (1.0 + g2) ** 2
    a2 = alpha * alpha

    def W(x, y):
        return pref * ((1.0 + a2) + g2 * a2 * (x * x + y * y))

    return W


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def lambda_bounds(mu: float, alpha: float, c: float = 1.0):
    """(lower, upper) bounds on the normalized mass lam = mu int e^u carried
    by the profile pair: the exact integrals int e^{v_-+} are
    c*(pi/alpha)(1+gamma_-^2) and (pi/alpha)(1+gamma_+^2)."""
    gm2 = gamma_minus_sq(mu, alpha, c)
    gp2 = gamma_plus_sq(mu, alpha)
    lower = mu * c * (math.pi / alpha) * (1.0 + gm2)
    upper = mu * (math.pi / alpha) * (1.0 + gp2)
    return lower, upper


def lambda_lower(alpha: float, c: float = 1.0) -> float:
    """Existence threshold from below at the fold mu = mu_bar."""
    return lambda_bounds(mu_bar(alpha), alpha, c)[0]


def lambda_upper(alpha: float) -> float:
    """Mass of the outer profile at the fold: 2 pi (1+a^2)^2 / (a (3-a^2))."""
    a2 = alpha * alpha
    return TWO_PI * (1.0 + a2) ** 2 / (alpha * (3.0 - a2))


def pohozaev_bound(alpha: float) -> float:
    """Nonexistence threshold from the boundary identity: 4 pi (1+a^2)/a."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return 4.0 * math.pi * (1.0 + alpha * alpha) / alpha


def alpha_star_upper() -> float:
    """Aspect ratio at which lambda_upper crosses 8 pi (root-found)."""
    return brentq(lambda a: lambda_upper(a) - 8.0 * math.pi, 1e-6, 1.0,
                  xtol=1e-10)


def alpha_star_lower(c: float = 1.0) -> float:
    """Aspect ratio at which lambda_lower(. , c) crosses 8 pi."""
    if not 0.0 < c <= 1.0:
        raise ValueError("c must lie in (0, 1]")
    return brentq(lambda a: lambda_lower(a, c) - 8.0 * math.pi, 1e-6, 1.0,
                  xtol=1e-10)


def _phi_of_n(n: float) -> float:
    """Aspect ratio certified for a convex domain of isoperimetric ratio N
    through the John-ellipse sandwich (decreasing in N)."""
    t = 8192.0 * math.sqrt(2.0) / (math.pi * n)
    den = math.pi * n - 64.0 - t
    if den <= 0.0:
        return math.inf
    return (64.0 + t) / den


def _psi_of_n(n: float) -> float:
    """Aspect ratio certified via the inscribed-ellipse area bound."""
    den = 3.0 * math.sqrt(3.0) * n - math.pi**2
    if den <= 0.0:
        return math.inf
    return math.pi**2 / den


_N_BAR_CACHE = None


def n_bar() -> float:
    """Smallest isoperimetric ratio the convex pipeline certifies: the root
    of phi(N) = alpha_star_lower(1/4)."""
    global _N_BAR_CACHE
    if _N_BAR_CACHE is None:
        target = alpha_star_lower(0.25)
        _N_BAR_CACHE = brentq(lambda n: _phi_of_n(n) - target, 30.0, 1e7,
                              xtol=1e-6)
    return _N_BAR_CACHE


def convex_thresholds(n: float):
    """(Lambda_lower, Lambda_upper) for a convex domain with isoperimetric
    ratio N: solutions exist for lam < Lambda_lower, and the profile
    construction cannot reach beyond Lambda_upper."""
    if n <= n_bar():
        raise ValueError(f"N={n} below certified range (N_bar={n_bar():.1f})")
    lo = lambda_lower(_phi_of_n(n), 0.25)
    hi = lambda_upper(_psi_of_n(n))
    return lo, hi


@dataclass(frozen=True)
class ThresholdReport:
    alpha: float
    c: float
    mu_bar: float
    gamma_bar_sq: float
    gamma_under_sq: float
    lambda_lower: float
    lambda_upper: float
    alpha_star_lower_c: float
    alpha_star_upper: float
    pohozaev: float

    def __post_init__(self):
        assert self.gamma_under_sq < self.gamma_bar_sq
        assert self.lambda_lower <= self.lambda_upper
        expected = 4.0 * math.pi * (1.0 + self.alpha**2) / self.alpha
        assert abs(self.pohozaev - expected) <= 1e-12 * expected


def thresholds_report(alpha: float, c: float = 1.0) -> ThresholdReport:
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if not 0.0 < c <= 1.0:
        raise ValueError("c must lie in (0, 1]")
    return ThresholdReport(
        alpha=alpha,
        c=c,
        mu_bar=mu_bar(alpha),
        gamma_bar_sq=gamma_bar_sq(alpha),
        gamma_under_sq=gamma_under_sq(alpha, c),
        lambda_lower=lambda_lower(alpha, c),
        lambda_upper=lambda_upper(alpha),
        alpha_star_lower_c=alpha_star_lower(c),
        alpha_star_upper=alpha_star_upper(),
        pohozaev=pohozaev_bound(alpha),
    )


# ---------------------------------------------------------------------------
# small-alpha series of the branch
# ---------------------------------------------------------------------------

def psi0(alpha: float):
    """Torsion-type profile psi0 = (1 - q)/(2(1+a^2)); -Lap psi0 = 1."""
    a2 = alpha * alpha
    q = q_form(alpha)

    def psi(x, y):
        return (1.0 - q(x, y)) / (2.0 * (1.0 + a2))

    return psi


def psi0_integral(alpha: float) -> float:
    """Exact integral of psi0 over omega_alpha: pi/(4 alpha (1+alpha^2))."""
    return math.pi / (4.0 * alpha * (1.0 + alpha * alpha))


def psi0_sq_integral(alpha: float) -> float:
    """Exact integral of psi0^2 over omega_alpha: pi/(12 alpha (1+alpha^2)^2)."""
    return math.pi / (12.0 * alpha * (1.0 + alpha * alpha) ** 2)


def phi1_integral(mu0: float, alpha: float) -> float:
    """Exact integral of the second-order field alpha^2 phi1 over omega_alpha."""
    return math.pi * mu0 * mu0 * alpha / (12.0 * (1.0 + alpha * alpha) ** 2)


def phi0(lam: float, alpha: float):
    """Leading branch profile u ~ alpha * phi0: phi0 = mu0(lam, alpha) psi0."""
    m0 = mu0_series(lam, alpha)[0]
    psi = psi0(alpha)

    def phi(x, y):
        return m0 * psi(x, y)

    return phi


def mu0_series(lam: float, alpha: float):
    """(mu0, d mu0/d lam, d2 mu0/d lam2): mu0 = lam/pi - lam^2 a/(4 pi^2)."""
    pi = math.pi
    m0 = lam / pi - lam * lam * alpha / (4.0 * pi * pi)
    d1 = 1.0 / pi - lam * alpha / (2.0 * pi * pi)
    d2 = -alpha / (2.0 * pi * pi)
    return m0, d1, d2


def lambda0_series(mu0: float, alpha: float) -> float:
    """Inverse of mu0_series at the same order: lam0 = pi mu0 + pi mu0^2 a/4."""
    return math.pi * mu0 + math.pi * mu0 * mu0 * alpha / 4.0


def E_hat_series(lam: float, alpha: float):
    """(E_hat, dE/dlam, d2E/dlam2) of the branch energy in the thin limit:
    E_hat = a/(8 pi) + a^2 lam/(48 pi^2).  The second derivative vanishes at
    this order (remainder O(a^3))."""
    pi = math.pi
    e = alpha / (8.0 * pi) + alpha * alpha * lam / (48.0 * pi * pi)
    return e, alpha * alpha / (48.0 * pi * pi), 0.0


def lambda_hat_series(E: float, alpha: float):
    """(lam_hat, dlam/dE): linear inverse of E_hat_series."""
    pi = math.pi
    slope = 48.0 * pi * pi / (alpha * alpha)
    return slope * (E - alpha / (8.0 * pi)), slope


def entropy_curvature_leading(alpha: float) -> float:
    """Quoted leading-order curvature -528 pi^2 / a^2 of the entropy-energy
    relation in the thin limit.  The empirical counterpart is the
    finite-difference curvature of branch.entropy_curve; see the acceptance
    suite for how the two compare."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return -528.0 * math.pi**2 / (alpha * alpha)


def E_uniform(alpha: float) -> float:
    """Energy scale of the uniform density on omega_alpha: a/(8 pi).

    The exact uniform-density energy is a/(8 pi (1+a^2)); this contract
    value keeps only the thin-limit leading term (relative gap a^2).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return alpha / (8.0 * math.pi)


def E_uniform_exact(alpha: float) -> float:
    """Exact uniform-density energy (1/(2|w|^2)) int psi0 = a/(8 pi (1+a^2))."""
    return alpha / (8.0 * math.pi * (1.0 + alpha * alpha))


@dataclass(frozen=True)
class ExpansionCoeffs:
    mu0: float
    d_mu0: float
    dd_mu0: float
    E_hat: float
    d_E_hat: float
    dd_E_hat: float
    lambda_hat: float
    d_lambda_hat: float
    S_curv: float


def expansion_coeffs(lam: float, alpha: float) -> ExpansionCoeffs:
    m0, d1, d2 = mu0_series(lam, alpha)
    e, de, dde = E_hat_series(lam, alpha)
    lh, dlh = lambda_hat_series(e, alpha)
    return ExpansionCoeffs(m0, d1, d2, e, de, dde, lh, dlh,
                           entropy_curvature_leading(alpha))


# ---------------------------------------------------------------------------
# exact disk solutions (oracles)
# ---------------------------------------------------------------------------

def liouville_disk(gamma: float):
    """Exact radial solution on the unit disk.

    u = 2 log((1+g^2)/(1+g^2 r^2)) solves -Lap u = mu e^u with
    mu = 8 g^2/(1+g^2)^2, and carries mass lam = mu int e^u = 8 pi g^2/(1+g^2).
    Returns (field, mu, lam).
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    g2 = gamma * gamma
    mu = 8.0 * g2 / (1.0 + g2) ** 2
    lam = 8.0 * math.pi * g2 / (1.0 + g2)

    def u(x, y):
        r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
        return 2.0 * np.log((1.0 + g2) / (1.0 + g2 * r2))

    u.gamma_sq = g2
    return u, mu, lam


def disk_mass_integral(gamma: float) -> float:
    """int_disk e^u = pi (1 + gamma^2)."""
    return math.pi * (1.0 + gamma * gamma)


def disk_energy(gamma: float) -> float:
    """E = (1/(2 lam)) int delta u for the exact disk solution."""
    g2 = gamma * gamma
    if g2 == 0.0:
        return 0.0
    return (1.0 + g2) * ((1.0 + g2) * math.log1p(g2) - g2) / (8.0 * math.pi * g2 * g2)


def disk_entropy(gamma: float) -> float:
    """S = -int delta log delta for the exact disk solution."""
    g2 = gamma * gamma
    if g2 == 0.0:
        return math.log(math.pi)
    return math.log(math.pi) - math.log1p(g2) + 2.0 - 2.0 * math.log1p(g2) / g2
