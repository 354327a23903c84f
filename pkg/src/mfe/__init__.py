"""Mean field equation toolkit on thin elliptical and convex planar domains.

Subpackages
-----------
geometry   domains, John ellipses, Shortley-Weller grids and quadrature
closedform thin-limit thresholds, profiles and series coefficients
solver     Newton/continuation/monotone solvers and discrete functionals
spectrum   linearized eigenvalues along branches
branch     continuation drivers, entropy curves, multiplicity probes
cli        command line entry points (`mfe ...`)
"""

__version__ = "0.1.0"
