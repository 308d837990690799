"""Tropical central paths as exact piecewise-linear curves.

A path is stored by its breakpoints; on every piece all moving coordinates
decrease at unit speed, so a piece is described by its support K (direction
-e^K).  The segment count ``gamma`` groups consecutive pieces whose supports
form a decreasing chain, since each such run is a single tropical segment.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cex import u
from .polyhedron import TropPolyhedron, add_level_constraint, barycenter
from .tropical import NEG_INF, POS_INF, TropVector, as_value, d_inf, support, trop_segment_decompose, vec, vector_to_json

DEFAULT_RESOLUTION = Fraction(1, 2**20)


class MalformedPathError(ValueError):
    """A path piece is not of the form -e^K at unit speed."""


# -------------------------------------------------------------- closed form


def cex_tropical_path_point(n: int, lam) -> TropVector:
    """C_n(lam) for the CEX family, evaluated exactly."""
    if n < 1:
        raise ValueError("n >= 1 required")
    return tuple(_cex_point(n, as_value(lam)))


def _cex_point(n: int, lam: Fraction) -> list:
    if n == 1:
        return [min(Fraction(0), -lam)]
    if lam <= 0:
        return [Fraction(0)] * n
    un = u(n)
    if lam <= un - 1:
        return _cex_point(n - 1, lam)[: n - 2] + [Fraction(0), -lam]
    if lam <= un + 1:
        m = max(un - 1 - lam, Fraction(-1))
        return [-u(n - 1) + m] * (n - 2) + [m, -lam]
    prev = _cex_point(n - 1, lam - (un + 1))
    head = [-(u(n - 1) + 1) + p for p in prev[: n - 2]]
    return head + [-1 + prev[n - 2], -lam]


def generic_tropical_path_point(K: TropPolyhedron, c: Sequence, lam) -> TropVector:
    """Tropical barycenter of K cut by the level constraint <c, x> <= -lam."""
    return barycenter(add_level_constraint(K, c, lam))


# ------------------------------------------------------------- path objects


def _piece_support(p: Sequence, q: Sequence, dl: Fraction) -> frozenset:
    """Support K with q = p - dl * e^K, or raise."""
    if support(p) != support(q):
        raise MalformedPathError("support changes inside the path")
    moving = set()
    for i, (a, b) in enumerate(zip(p, q)):
        if a is NEG_INF:
            continue
        d = a - b
        if d == dl:
            moving.add(i)
        elif d != 0:
            raise MalformedPathError(f"coordinate {i + 1} has slope {-d / dl} on a piece")
    return frozenset(moving)


@dataclass(frozen=True)
class BreakpointPath:
    """Breakpoints (lambda_k, point_k) and per-piece supports (0-based index sets)."""

    breakpoints: tuple
    supports: tuple

    def __post_init__(self):
        if not self.breakpoints:
            raise MalformedPathError("a path needs at least one breakpoint")
        if len(self.supports) != len(self.breakpoints) - 1:
            raise MalformedPathError("need one support per piece")
        for (l0, p0), (l1, p1), K in zip(self.breakpoints, self.breakpoints[1:], self.supports):
            if l1 <= l0:
                raise MalformedPathError("lambda values must increase strictly")
            if _piece_support(p0, p1, l1 - l0) != K:
                raise MalformedPathError(f"support mismatch on [{l0}, {l1}]")

    @classmethod
    def from_points(cls, breakpoints: Sequence) -> "BreakpointPath":
        """Build from (lambda, point) pairs, deriving and merging supports."""
        pts = [(as_value(l), vec(list(p))) for l, p in breakpoints]
        sups = [_piece_support(p, q, l1 - l0) for (l0, p), (l1, q) in zip(pts, pts[1:])]
        keep = [pts[0]]
        merged = []
        for k, K in enumerate(sups):
            if merged and merged[-1] == K:
                keep[-1] = pts[k + 1]
            else:
                merged.append(K)
                keep.append(pts[k + 1])
        return cls(tuple(keep), tuple(merged))

    @property
    def dimension(self) -> int:
        return len(self.breakpoints[0][1])

    @property
    def interval(self) -> tuple:
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    @property
    def lambdas(self) -> list:
        return [l for l, _ in self.breakpoints]

    @property
    def points(self) -> list:
        return [p for _, p in self.breakpoints]

    def evaluate(self, lam) -> TropVector:
        lam = as_value(lam)
        lo, hi = self.interval
        if not lo <= lam <= hi:
            raise ValueError(f"{lam} outside [{lo}, {hi}]")
        for (l0, p0), (l1, _), K in zip(self.breakpoints, self.breakpoints[1:], self.supports):
            if lam <= l1:
                return tuple(x - (lam - l0) if i in K else x for i, x in enumerate(p0))
        return self.breakpoints[-1][1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda"] + [f"x{i + 1}" for i in range(self.dimension)])
        for lam, p in self.breakpoints:
            w.writerow([_fmt(lam)] + [_fmt(x) for x in p])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "lambdas": vector_to_json(self.lambdas),
            "points": [vector_to_json(p) for p in self.points],
            "supports": [sorted(i + 1 for i in K) for K in self.supports],
        }

    @classmethod
    def from_json(cls, d: dict) -> "BreakpointPath":
        bps = tuple((as_value(l), vec(list(p))) for l, p in zip(d["lambdas"], d["points"]))
        return cls(bps, tuple(frozenset(i - 1 for i in K) for K in d["supports"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _fmt(x) -> str:
    if x is NEG_INF:
        return "-inf"
    return str(x)


def _cex_candidates(n: int) -> set:
    """Superset of the breakpoints of C_n on [0, inf)."""
    if n == 1:
        return {Fraction(0)}
    prev = _cex_candidates(n - 1)
    un = u(n)
    out = {Fraction(0), un - 1, un, un + 1}
    out |= {x for x in prev if 0 <= x <= un - 1}
    out |= {un + 1 + x for x in prev if x >= 0}
    return out


def cex_path_breakpoints(n: int, lo, hi) -> BreakpointPath:
    """Exact breakpoints of C_n over [lo, hi]; the endpoints are always breakpoints."""
    lo, hi = as_value(lo), as_value(hi)
    if lo > hi:
        raise ValueError("empty interval")
    lams = sorted({lo, hi} | {x for x in _cex_candidates(n) if lo < x < hi})
    return BreakpointPath.from_points([(l, cex_tropical_path_point(n, l)) for l in lams])


# ------------------------------------------------------------------- gamma


def segment_runs(path: BreakpointPath) -> list:
    """Greedy maximal runs of pieces with nested supports, as (start, end) breakpoint indices.

    Constant pieces (empty support) trace no curve and are absorbed.
    """
    runs = []
    cur = None
    for k, K in enumerate(path.supports):
        if not K:
            if cur is not None:
                cur[1] = k + 1
            continue
        if cur is not None and K <= cur[2]:
            cur[1], cur[2] = k + 1, K
        else:
            if cur is not None:
                runs.append((cur[0], cur[1]))
            cur = [k, k + 1, K]
    if cur is not None:
        runs.append((cur[0], cur[1]))
    return runs


def gamma(path: BreakpointPath) -> int:
    """Minimal number of tropical segments whose concatenation is the path."""
    return len(segment_runs(path))


def cex_gamma(n: int, lo, hi) -> int:
    """gamma of C_n on [lo, hi]; an empty interval (lo > hi) holds no segment."""
    if as_value(lo) > as_value(hi):
        return 0
    return gamma(cex_path_breakpoints(n, lo, hi))


def reconstruct_from_runs(path: BreakpointPath) -> list:
    """Breakpoint points recovered by decomposing tsegm(start, end) of every run."""
    pts = [path.breakpoints[0][1]]
    for a, b in segment_runs(path):
        dec = trop_segment_decompose(path.breakpoints[a][1], path.breakpoints[b][1])
        pts.extend(dec.breakpoints[1:])
    return pts


# -------------------------------------------------------------------- tubes


@dataclass(frozen=True)
class Tube:
    path: BreakpointPath
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "radius", as_value(self.radius))
        if self.radius <= 0:
            raise ValueError("tube radius must be positive")


def distance_to_path(path: BreakpointPath, x: Sequence):
    """min over lambda in the path interval of d_inf(x, C(lambda)), exactly."""
    x = vec(list(x))
    if len(x) != path.dimension:
        raise ValueError(f"dimension mismatch: {len(x)} != {path.dimension}")
    if len(path.breakpoints) == 1:
        return d_inf(x, path.breakpoints[0][1])
    best = POS_INF
    for (l0, p0), (l1, _), K in zip(path.breakpoints, path.breakpoints[1:], path.supports):
        if support(x) != support(p0):
            continue
        L = l1 - l0
        fixed = [abs(x[i] - p0[i]) for i in support(x) if i not in K]
        # on the piece, x_i - C_i = a_i + s for moving i, s in [0, L]
        a = [x[i] - p0[i] for i in K]
        if a:
            s = min(max(-(max(a) + min(a)) / 2, Fraction(0)), L)
            moving = max(abs(max(a) + s), abs(min(a) + s))
        else:
            moving = Fraction(0)
        d = max(fixed + [moving])
        if best is POS_INF or d < best:
            best = d
    return best


def tube_contains(tube: Tube, curve: Sequence) -> bool:
    """Whether every curve point lies within d_inf <= radius of the path."""
    for x in curve:
        d = distance_to_path(tube.path, x)
        if d is POS_INF or d > tube.radius:
            return False
    return True


# ------------------------------------------------- generic path extraction


@dataclass
class ExtractedPath:
    path: BreakpointPath
    unresolved: list = field(default_factory=list)


def extract_breakpoints(K: TropPolyhedron, c: Sequence, lo, hi, resolution=DEFAULT_RESOLUTION) -> ExtractedPath:
    """Breakpoints of the barycenter path by bisection in lambda.

A failing interval is first tested for a single kink located by intersecting the
end slopes, so breakpoints off the dyadic grid are found exactly.

    An interval is accepted as one piece when every coordinate drops either by 0
    or by the full interval length; for a monotone 1-Lipschitz path that forces
    linearity on the whole interval.  Intervals shorter than ``resolution`` that
    still fail are recorded in ``unresolved`` and their endpoints joined anyway.
    """
    lo, hi = as_value(lo), as_value(hi)
    resolution = as_value(resolution)
    cache = {}

    def point(lam):
        if lam not in cache:
            cache[lam] = generic_tropical_path_point(K, c, lam)
        return cache[lam]

    def linear(a, b) -> bool:
        try:
            _piece_support(point(a), point(b), b - a)
            return True
        except MalformedPathError:
            return False

    def kink(a, b):
        # intersect the lines through each end; exact when one breakpoint lies inside
        h = (b - a) / 64
        if not (linear(a, a + h) and linear(b - h, b)):
            return None
        pa, pb = point(a), point(b)
        cands = set()
        for i, (xa, xb) in enumerate(zip(pa, pb)):
            if xa is NEG_INF or xb is NEG_INF:
                continue
            dl = (xa - point(a + h)[i]) / h
            dr = (point(b - h)[i] - xb) / h
            if dl != dr:
                cands.add((xb + dr * b - xa - dl * a) / (dr - dl))
        if len(cands) != 1:
            return None
        m = cands.pop()
        if a < m < b and linear(a, m) and linear(m, b):
            return m
        return None

    lams = [lo]
    unresolved = []
    stack = [(lo, hi)] if hi > lo else []
    while stack:
        a, b = stack.pop()
        if linear(a, b):
            lams.append(b)
        elif (m := kink(a, b)) is not None:
            lams.extend((m, b))
        elif b - a <= resolution:
            unresolved.append((a, b))
            lams.append(b)
        else:
            mid = (a + b) / 2
            stack.append((mid, b))
            stack.append((a, mid))
    pts = [(l, point(l)) for l in lams]
    if unresolved:
        return ExtractedPath(_loose_path(pts), unresolved)
    return ExtractedPath(BreakpointPath.from_points(pts), unresolved)


def _loose_path(pts):
    """Breakpoints kept as sampled, with supports from coordinates that moved."""
    sups = []
    for (l0, p), (l1, q) in zip(pts, pts[1:]):
        sups.append(frozenset(i for i, (a, b) in enumerate(zip(p, q)) if a is not NEG_INF and a != b))
    path = object.__new__(BreakpointPath)
    object.__setattr__(path, "breakpoints", tuple(pts))
    object.__setattr__(path, "supports", tuple(sups))
    return path
