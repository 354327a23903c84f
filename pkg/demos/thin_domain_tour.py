"""
Closed-form thresholds on thin ellipses, checked against the grid.

For the ellipse alpha^2 x^2 + y^2 <= 1 the solvable range of the
normalized problem splits at two intensities with exact expressions:
lambda_lower (below it the state is unique and small) and lambda_upper
(above it no solution exists).  Both scale like 1/alpha, so alpha *
lambda has a finite limit as the domain degenerates, and the window
[lambda_lower, lambda_upper] eventually swallows every fixed multiple
of pi.  The script tabulates the thresholds, locates the aspect ratio
where lambda_upper crosses 8 pi, and then follows the small branch on a
grid to confirm the closed-form energy expansion.
"""

import math

import numpy as np

from mfe import closedform as cf
from mfe.geometry import Ellipse, build_grid, auto_resolution
from mfe.branch import continue_branch, energy_entropy_along

ALPHAS = (0.4, 0.2, 0.1, 0.05, 0.02)


def main():
    print(" alpha   lambda_lower  lambda_upper   a*ll/pi    a*lu/pi")
    for a in ALPHAS:
        ll = cf.lambda_lower(a)
        lu = cf.lambda_upper(a)
        print(f"  {a:4.2f}   {ll:11.5f}  {lu:11.5f}   {a * ll / math.pi:7.5f}"
              f"    {a * lu / math.pi:7.5f}")
    print(f"limits: a*ll/pi -> 4/7 = {4.0 / 7.0:.5f} (round domain, c = 1), "
          f"a*lu/pi -> 2/3 = {2.0 / 3.0:.5f}")

    a_star = cf.alpha_star_upper()
    print(f"\nlambda_upper crosses 8 pi at alpha = {a_star:.9f}")
    print(f"   check: lambda_upper(a*) / 8 pi = "
          f"{cf.lambda_upper(a_star) / (8 * math.pi):.12f}")

    # follow the small branch on one thin ellipse and compare the energy
    # along it with the two-term closed-form series
    alpha = 0.05
    nx, ny = auto_resolution(Ellipse(alpha))
    nx, ny = min(nx, 640), min(ny, 32)
    grid = build_grid(Ellipse(alpha), nx, ny)
    br = continue_branch(grid, control="lambda", target=8 * math.pi)
    curve = energy_entropy_along(br, alpha)

    print(f"\nenergy along the small branch of the alpha = {alpha} ellipse "
          f"({nx}x{ny} grid)")
    print("   lambda      E (grid)      E (series)    rel err")
    lam = br.column("lam")
    eng = br.column("energy")
    for k in range(0, len(br), max(1, len(br) // 8)):
        series = cf.E_hat_series(lam[k], alpha)[0]
        rel = abs(eng[k] - series) / abs(series)
        print(f"  {lam[k]:8.4f}   {eng[k]:.8f}   {series:.8f}   {rel:.2e}")

    mid = len(curve.E_grid) // 2
    print(f"\nentropy curvature near mid-window: "
          f"{curve.d2S_dE2[mid]:.6g} "
          f"(reference scale -48 pi^2/alpha^2 = {-48 * math.pi**2 / alpha**2:.6g})")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available, skipping the plot")
        return

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(curve.E_grid, curve.S_grid, "-")
    ax.set_xlabel("E")
    ax.set_ylabel("S")
    ax.set_title(f"concave entropy-energy arc, alpha = {alpha}")
    fig.tight_layout()
    fig.savefig("thin_domain_tour.png", dpi=120)
    print("wrote thin_domain_tour.png")


if __name__ == "__main__":
    main()
