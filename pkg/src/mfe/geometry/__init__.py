"""Domains, canonical frames, John ellipses, and Shortley-Weller grids."""

from .domains import (
    BOUNDARY_TIE_TOL,
    CanonicalFrame,
    ConvexPolygon,
    Disk,
    Ellipse,
    EllipseSpec,
    RawEllipse,
    canonicalize,
    isoperimetric_ratio,
    load_polygon,
    ramanujan_perimeter,
    rectangle,
    rotation_matrix,
)
from .grid import RESOLUTION_MAX, RESOLUTION_MIN, Grid, auto_resolution, build_grid
from .john import LASSAK_RATIO, inscribed_ratio, john_ellipse, sandwich_gap

__all__ = [
    "BOUNDARY_TIE_TOL",
    "CanonicalFrame",
    "ConvexPolygon",
    "Disk",
    "Ellipse",
    "EllipseSpec",
    "RawEllipse",
    "canonicalize",
    "isoperimetric_ratio",
    "load_polygon",
    "ramanujan_perimeter",
    "rectangle",
    "rotation_matrix",
    "RESOLUTION_MAX",
    "RESOLUTION_MIN",
    "Grid",
    "auto_resolution",
    "build_grid",
    "LASSAK_RATIO",
    "inscribed_ratio",
    "john_ellipse",
    "sandwich_gap",
]
