"""Norm balls of real cubic forms on the circle and the sphere."""

from .poly import Cubic2, Cubic3, apply_orthogonal, evaluate, gradient, make_zonal, restrict_to_plane, tangent_hessian

__all__ = [
    "Cubic2",
    "Cubic3",
    "apply_orthogonal",
    "evaluate",
    "gradient",
    "make_zonal",
    "restrict_to_plane",
    "tangent_hessian",
]
