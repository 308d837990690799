"""Max-plus scalars and vectors, the extended sup-norm metric, tropical segments.

All finite values are exact :class:`fractions.Fraction` objects.  The bottom
element of the semifield is the singleton :data:`NEG_INF`, which orders below
every rational and absorbs tropical multiplication (ordinary addition).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union


class _NegInf:
    """The tropical zero.  Compares below every number, absorbs ``+``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NEG_INF"

    def __str__(self) -> str:
        return "-inf"

    def __reduce__(self):
        return (_NegInf, ())

    def __hash__(self) -> int:
        return hash("tropipm.NEG_INF")

    def __eq__(self, other) -> bool:
        return other is self

    def __lt__(self, other) -> bool:
        return other is not self

    def __le__(self, other) -> bool:
        return True

    def __gt__(self, other) -> bool:
        return False

    def __ge__(self, other) -> bool:
        return other is self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __sub__(self, other):
        if other is self:
            raise ArithmeticError("-inf - (-inf) is undefined")
        return self

    def __rsub__(self, other):
        raise ArithmeticError("subtracting -inf from a finite value is undefined")

    def __neg__(self):
        raise ArithmeticError("+inf is not an element of the tropical semifield")


NEG_INF = _NegInf()
POS_INF = math.inf  # only ever returned by d_inf; never stored in a vector

TropValue = Union[Fraction, _NegInf]
TropVector = tuple  # tuple[TropValue, ...]


def as_value(x) -> TropValue:
    """Coerce ints, Fractions, decimal strings, "p/q" strings and "-inf" to a TropValue.

    Floats are converted exactly (``Fraction(0.1)`` is not ``1/10``); use strings
    when the decimal reading is intended.
    """
    if x is NEG_INF:
        return NEG_INF
    if isinstance(x, str):
        s = x.strip()
        if s.lower() in ("-inf", "-infinity", "neg_inf"):
            return NEG_INF
        return Fraction(s)
    if isinstance(x, float):
        if x == -math.inf:
            return NEG_INF
        if not math.isfinite(x):
            raise ValueError(f"{x!r} is not a tropical value")
        return Fraction(x)
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a tropical value")


def vec(*entries) -> TropVector:
    """Build a TropVector.  ``vec(0, -1)`` and ``vec([0, -1])`` are equivalent."""
    if len(entries) == 1 and not isinstance(entries[0], (int, float, str, Rational, _NegInf)):
        entries = tuple(entries[0])
    if not entries:
        raise ValueError("tropical vectors have dimension >= 1")
    return tuple(as_value(e) for e in entries)


def is_finite(x: TropValue) -> bool:
    return x is not NEG_INF


def support(u: Sequence[TropValue]) -> frozenset:
    """0-based indices of the finite entries."""
    return frozenset(i for i, x in enumerate(u) if x is not NEG_INF)


def _check_dims(u, v) -> None:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} != {len(v)}")


def tmax(a: TropValue, b: TropValue) -> TropValue:
    return b if a is NEG_INF or (b is not NEG_INF and b > a) else a


def shift(u: Sequence[TropValue], lam: TropValue) -> TropVector:
    """Tropical scalar multiplication u + lam*e."""
    return tuple(x + lam if x is not NEG_INF else NEG_INF for x in u) if lam is not NEG_INF \
        else tuple(NEG_INF for _ in u)


def join(u: Sequence[TropValue], v: Sequence[TropValue]) -> TropVector:
    """Entrywise maximum (tropical vector addition)."""
    _check_dims(u, v)
    return tuple(tmax(a, b) for a, b in zip(u, v))


def leq(u: Sequence[TropValue], v: Sequence[TropValue]) -> bool:
    _check_dims(u, v)
    return all(a <= b for a, b in zip(u, v))


def trop_dot(c: Sequence[TropValue], x: Sequence[TropValue]) -> TropValue:
    """max_i (c_i + x_i); NEG_INF when every term is."""
    _check_dims(c, x)
    best: TropValue = NEG_INF
    for a, b in zip(c, x):
        if a is NEG_INF or b is NEG_INF:
            continue
        best = tmax(best, a + b)
    return best


def d_inf(u: Sequence[TropValue], v: Sequence[TropValue]):
    """Sup-norm distance extended to T^n.

    Returns a Fraction, or ``math.inf`` when the supports differ (the defining
    infimum is over an empty set).
    """
    _check_dims(u, v)
    if support(u) != support(v):
        return POS_INF
    gaps = [abs(a - b) for a, b in zip(u, v) if a is not NEG_INF]
    return max(gaps, default=Fraction(0))


def trop_segment_point(u, v, lam, mu) -> TropVector:
    """The point (u + lam*e) v (v + mu*e) of tsegm(u, v); requires max(lam, mu) = 0."""
    _check_dims(u, v)
    lam, mu = as_value(lam), as_value(mu)
    if tmax(lam, mu) != 0:
        raise ValueError(f"weights must satisfy max(lam, mu) = 0, got ({lam}, {mu})")
    return join(shift(u, lam), shift(v, mu))


@dataclass(frozen=True)
class TropSegmentDecomposition:
    """Ordinary-segment pieces of tsegm(u, v), listed from u to v.

    ``directions[k]`` is the unit-speed direction of the piece from
    ``breakpoints[k]`` to ``breakpoints[k + 1]``; entries are in {-1, 0, 1}.
    """

    breakpoints: tuple
    directions: tuple

    @property
    def moving_sets(self) -> list:
        return [frozenset(i for i, d in enumerate(dv) if d != 0) for dv in self.directions]


def trop_segment_decompose(u, v) -> TropSegmentDecomposition:
    """Polygonal decomposition of tsegm(u, v) ordered from u to v.

    The segment is traced as the arc ``u v (v + mu e)`` (mu from -inf up to 0,
    coordinates with v_i > u_i rise) followed by the arc ``(u + lam e) v v``
    (lam from 0 down to -inf, coordinates with u_i > v_i fall).  Equal gaps
    merge into one piece and no zero-length pieces are emitted.  For v <= u only
    the falling arc exists and its moving sets strictly decrease.
    """
    _check_dims(u, v)
    u, v = tuple(u), tuple(v)
    n = len(u)
    if support(u) != support(v):
        raise ValueError("tropical segment decomposition needs equal supports")
    fin = sorted(support(u))
    pts = [u]
    dirs = []

    def emit(moving, length, sign):
        cur = pts[-1]
        cur = tuple(cur[i] + sign * length if i in moving else cur[i] for i in range(n))
        d = tuple(sign if i in moving else 0 for i in range(n))
        if dirs and dirs[-1] == d:
            pts[-1] = cur
        else:
            dirs.append(d)
            pts.append(cur)

    # rising arc: coordinate i joins once the elapsed time exceeds maxgap - gap_i
    rise = {i: v[i] - u[i] for i in fin if v[i] > u[i]}
    if rise:
        top = max(rise.values())
        starts = sorted({top - g for g in rise.values()})
        for k, s0 in enumerate(starts):
            s1 = starts[k + 1] if k + 1 < len(starts) else top
            emit(frozenset(i for i, g in rise.items() if top - g <= s0), s1 - s0, 1)
    # falling arc: coordinate i keeps moving while the elapsed time is below gap_i
    fall = {i: u[i] - v[i] for i in fin if u[i] > v[i]}
    prev = Fraction(0)
    for g in sorted(set(fall.values())):
        emit(frozenset(i for i, gi in fall.items() if gi >= g), g - prev, -1)
        prev = g
    if pts[-1] != v:  # pragma: no cover - guarded by construction
        raise AssertionError("segment decomposition failed to reach v")
    return TropSegmentDecomposition(tuple(pts), tuple(dirs))


def vector_to_json(u: Sequence[TropValue]) -> list:
    """JSON array with "-inf" for the bottom element; finite values as "p/q" or int strings."""
    out = []
    for x in u:
        if x is NEG_INF:
            out.append("-inf")
        elif x.denominator == 1:
            out.append(int(x))
        else:
            out.append(f"{x.numerator}/{x.denominator}")
    return out


def vector_from_json(data: Iterable) -> TropVector:
    return vec(list(data))


def format_value(x: TropValue) -> str:
    if x is NEG_INF:
        return "-inf"
    return str(x)
