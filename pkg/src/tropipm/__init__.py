"""Tropical central paths, the CEX_n(t) linear programs and a high-precision log-barrier path follower."""

from .tropical import NEG_INF, d_inf, trop_dot, trop_segment_decompose, trop_segment_point, vec
from .polyhedron import TropPolyhedron, barycenter, greatest_point_below, is_feasible
from .path import BreakpointPath, cex_path_breakpoints, cex_tropical_path_point, gamma
from .cex import build_cex, build_tcex, instantiate, u

__all__ = [
    "NEG_INF", "d_inf", "trop_dot", "trop_segment_decompose", "trop_segment_point", "vec",
    "TropPolyhedron", "barycenter", "greatest_point_below", "is_feasible",
    "BreakpointPath", "cex_path_breakpoints", "cex_tropical_path_point", "gamma",
    "build_cex", "build_tcex", "instantiate", "u",
]
