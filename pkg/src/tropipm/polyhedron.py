"""Tropical polyhedra given by two-sided max-plus inequalities.

A :class:`TropPolyhedron` is the set of x in T^n with

    max(max_i a_i + x_i, a_0) <= max(max_i b_i + x_i, b_0)

for each of its inequalities.  Such sets are tropically convex and closed under
the entrywise maximum, so the greatest feasible point below any bound exists as
soon as the set below the bound is nonempty.  :func:`greatest_point_below`
computes it by monotone clamping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .tropical import (
    NEG_INF,
    TropVector,
    as_value,
    tmax,
    trop_dot,
    vec,
    vector_to_json,
)

COLLAPSE_FLOOR = Fraction(10**6)


class EmptyError(Exception):
    """No feasible point lies below the requested bound."""


class UnconvergedError(Exception):
    """Clamping did not reach a fixpoint within the iteration budget."""


class UnboundedError(Exception):
    """Some coordinate has no upper bound extractable from single-sided constraints."""


@dataclass(frozen=True)
class TropAffineForm:
    """x -> max(max_i coeffs[i] + x_i, constant)."""

    coeffs: TropVector
    constant: object = NEG_INF

    @classmethod
    def of(cls, n: int, terms: dict | None = None, constant=NEG_INF) -> "TropAffineForm":
        """Sparse constructor: ``terms`` maps 0-based variable index to coefficient."""
        coeffs = [NEG_INF] * n
        for i, a in (terms or {}).items():
            coeffs[i] = as_value(a)
        return cls(tuple(coeffs), as_value(constant))

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    def value(self, x: Sequence) -> object:
        return tmax(trop_dot(self.coeffs, x), self.constant)

    def to_json(self) -> dict:
        return {"coeffs": vector_to_json(self.coeffs),
                "const": vector_to_json((self.constant,))[0]}

    @classmethod
    def from_json(cls, data: dict) -> "TropAffineForm":
        return cls(vec(list(data["coeffs"])), as_value(data.get("const", "-inf")))


@dataclass(frozen=True)
class TropInequality:
    lhs: TropAffineForm
    rhs: TropAffineForm

    def satisfied(self, x: Sequence) -> bool:
        return self.lhs.value(x) <= self.rhs.value(x)

    def strictly_satisfied(self, x: Sequence) -> bool:
        lv, rv = self.lhs.value(x), self.rhs.value(x)
        return lv is NEG_INF and rv is not NEG_INF or lv < rv

    def to_json(self) -> dict:
        return {"lhs": self.lhs.to_json(), "rhs": self.rhs.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "TropInequality":
        return cls(TropAffineForm.from_json(data["lhs"]), TropAffineForm.from_json(data["rhs"]))


@dataclass(frozen=True)
class TropPolyhedron:
    n: int
    ineqs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for q in self.ineqs:
            if q.lhs.dimension != self.n or q.rhs.dimension != self.n:
                raise ValueError("inequality dimension does not match polyhedron")

    def with_inequality(self, ineq: TropInequality) -> "TropPolyhedron":
        return TropPolyhedron(self.n, self.ineqs + (ineq,))

    def to_json(self) -> dict:
        return {"n": self.n, "ineqs": [q.to_json() for q in self.ineqs]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "TropPolyhedron":
        return cls(int(data["n"]), tuple(TropInequality.from_json(q) for q in data["ineqs"]))


def is_feasible(P: TropPolyhedron, x: Sequence) -> bool:
    if len(x) != P.n:
        raise ValueError(f"dimension mismatch: {len(x)} != {P.n}")
    return all(q.satisfied(x) for q in P.ineqs)


def is_strictly_feasible(P: TropPolyhedron, x: Sequence) -> bool:
    if len(x) != P.n:
        raise ValueError(f"dimension mismatch: {len(x)} != {P.n}")
    return all(q.strictly_satisfied(x) for q in P.ineqs)


def add_level_constraint(P: TropPolyhedron, c: Sequence, lam) -> TropPolyhedron:
    """Append <c, x>_trop <= -lam."""
    if len(c) != P.n:
        raise ValueError(f"dimension mismatch: {len(c)} != {P.n}")
    lam = as_value(lam)
    lhs = TropAffineForm(vec(list(c)), NEG_INF)
    rhs = TropAffineForm(tuple([NEG_INF] * P.n), -lam)
    return P.with_inequality(TropInequality(lhs, rhs))


def greatest_point_below(P: TropPolyhedron, u: Sequence, max_iters: int | None = None) -> TropVector:
    """Greatest feasible point of P that is <= u.

    Violated inequalities are visited round-robin in listed order.  For a
    violated one with right-hand value r, every coordinate i with a_i + x_i > r
    is lowered to r - a_i.  Each clamp only removes points that cannot be
    feasible below the current iterate, so the fixpoint is the greatest feasible
    point below ``u``.  Raises :class:`EmptyError` when a left-hand constant
    exceeds a right-hand side that has dropped to -inf, and
    :class:`UnconvergedError` when the budget (default 64 * n * #ineqs sweeps)
    runs out.
    """
    if len(u) != P.n:
        raise ValueError(f"dimension mismatch: {len(u)} != {P.n}")
    x = list(vec(list(u)))
    if max_iters is None:
        max_iters = 64 * P.n * max(1, len(P.ineqs))
    finite = [a for a in x if a is not NEG_INF]
    floor = (min(finite) - COLLAPSE_FLOOR) if finite else None

    for _ in range(max_iters):
        changed = False
        for q in P.ineqs:
            lhs = q.lhs.value(x)
            r = q.rhs.value(x)
            if lhs <= r:
                continue
            if q.lhs.constant > r:
                raise EmptyError(f"constant {q.lhs.constant} exceeds right-hand side {r}")
            for i, a in enumerate(q.lhs.coeffs):
                if a is NEG_INF or x[i] is NEG_INF or a + x[i] <= r:
                    continue
                x[i] = NEG_INF if r is NEG_INF else r - a
                if floor is not None and x[i] is not NEG_INF and x[i] < floor:
                    x[i] = NEG_INF
                changed = True
        if not changed:
            return tuple(x)
    raise UnconvergedError(f"no fixpoint after {max_iters} sweeps")


def upper_bound(P: TropPolyhedron) -> TropVector:
    """Coordinatewise upper bound from inequalities whose right side is a constant.

    For ``max(a_i + x_i, ...) <= b_0`` every x_i with finite a_i is bounded by
    b_0 - a_i.  Raises :class:`UnboundedError` if some coordinate stays
    unbounded.
    """
    bound = [None] * P.n
    for q in P.ineqs:
        if any(b is not NEG_INF for b in q.rhs.coeffs):
            continue
        r = q.rhs.constant
        for i, a in enumerate(q.lhs.coeffs):
            if a is NEG_INF:
                continue
            b = NEG_INF if r is NEG_INF else r - a
            bound[i] = b if bound[i] is None or b < bound[i] else bound[i]
    missing = [i for i, b in enumerate(bound) if b is None]
    if missing:
        raise UnboundedError(f"coordinates {[i + 1 for i in missing]} are not bounded above")
    return tuple(bound)


def barycenter(P: TropPolyhedron, max_iters: int | None = None) -> TropVector:
    """Tropical barycenter (entrywise supremum) of P."""
    return greatest_point_below(P, upper_bound(P), max_iters)


def within_distance(P: TropPolyhedron, y: Sequence, delta) -> bool:
    """Whether some feasible z has d_inf(y, z) <= delta.

    Exact: the greatest feasible point below y + delta*e is the best candidate,
    so it suffices to test that it still dominates y - delta*e.
    """
    y = vec(list(y))
    delta = as_value(delta)
    up = tuple(a if a is NEG_INF else a + delta for a in y)
    try:
        g = greatest_point_below(P, up)
    except EmptyError:
        return False
    return all((a is NEG_INF and b is NEG_INF) or (a is not NEG_INF and b is not NEG_INF and b >= a - delta)
               for a, b in zip(y, g))


def distance_to(P: TropPolyhedron, y: Sequence, resolution=Fraction(1, 2**20), cap=Fraction(10**3)):
    """Upper estimate (within ``resolution``) of the d_inf distance from y to P.

    Returns ``None`` when no point of P within ``cap`` shares the support of y.
    """
    if within_distance(P, y, 0):
        return Fraction(0)
    if not within_distance(P, y, cap):
        return None
    lo, hi = Fraction(0), Fraction(cap)
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if within_distance(P, y, mid):
            hi = mid
        else:
            lo = mid
    return hi
