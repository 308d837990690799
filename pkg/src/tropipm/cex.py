"""The CEX_n(t) family: symbolic form, tropicalization, exact instantiation and
combinatorial checks on the instantiated polytope.

Every coefficient of CEX_n(t) is a signed power of t with a half-integer
exponent (u_1 = 1/2).  Instantiation therefore works in the base s with
t = s**2, which keeps every entry an exact rational.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .polyhedron import TropAffineForm, TropInequality, TropPolyhedron, is_feasible, is_strictly_feasible
from .tropical import NEG_INF, TropVector, as_value, vec

MAX_ENUM_DIM = 6


def u(k: int) -> Fraction:
    """Exponent u_k = 3 * 2**(k-2) - 1 (so u_1 = 1/2, u_2 = 2, u_3 = 5, u_4 = 11)."""
    if k < 1:
        raise ValueError("u_k is defined for k >= 1")
    return Fraction(3 * 2**k, 4) - 1


# ---------------------------------------------------------------- symbolic LP


@dataclass(frozen=True)
class Monomial:
    """coeff * t**exponent."""

    coeff: Fraction = Fraction(0)
    exponent: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "exponent", Fraction(self.exponent))

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    def to_json(self) -> dict:
        return {"c": _frac_str(self.coeff), "e": _frac_str(self.exponent)}

    @classmethod
    def from_json(cls, d: dict) -> "Monomial":
        return cls(Fraction(str(d["c"])), Fraction(str(d.get("e", "0"))))


ZERO = Monomial()


def mono(coeff, exponent=0) -> Monomial:
    return Monomial(Fraction(coeff), Fraction(exponent))


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class LPRow:
    """sum_j coeffs[j] * x_j <= rhs; a cell is a Monomial or a tuple of Monomials (their sum)."""

    coeffs: tuple
    rhs: object = ZERO
    label: str = ""


@dataclass(frozen=True)
class MonomialLP:
    """Minimize objective . x subject to rows, all entries signed monomials in t."""

    n: int
    rows: tuple
    objective: tuple

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "rows": [
                {"coeffs": [_cell_json(c) for c in r.coeffs], "rhs": _cell_json(r.rhs), "label": r.label}
                for r in self.rows
            ],
            "objective": [_cell_json(c) for c in self.objective],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, d: dict) -> "MonomialLP":
        rows = tuple(
            LPRow(tuple(_cell_from_json(c) for c in r["coeffs"]), _cell_from_json(r["rhs"]), r.get("label", ""))
            for r in d["rows"]
        )
        return cls(int(d["n"]), rows, tuple(_cell_from_json(c) for c in d["objective"]))


def _cell_terms(cell) -> tuple:
    if isinstance(cell, Monomial):
        return () if cell.is_zero else (cell,)
    return tuple(m for m in cell if not m.is_zero)


def _cell_json(cell):
    if isinstance(cell, Monomial):
        return cell.to_json()
    return [m.to_json() for m in cell]


def _cell_from_json(d):
    if isinstance(d, list):
        return tuple(Monomial.from_json(m) for m in d)
    return Monomial.from_json(d)


def build_cex(n: int) -> MonomialLP:
    """Symbolic CEX_n(t): minimize x_n over 2n inequality rows.

    Row order: the n-1 coupling rows, the simplex row, then the chain
    0 <= x_1 <= ... <= x_{n-1} <= t^{u_n} x_n as n single rows.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    rows = []
    for i in range(1, n):
        cells = [ZERO] * n
        for j in range(1, i):
            cells[j - 1] = mono(1, -u(i))
        cells[i - 1] = mono(1, -u(i + 1) + 1)
        for j in range(i + 1, n):
            cells[j - 1] = mono(-1, -u(j))
        cells[n - 1] = mono(-1, 0)
        rows.append(LPRow(tuple(cells), mono(1, -u(n)), f"coupling{i}"))
    rows.append(LPRow(tuple([mono(1)] * n), mono(1), "simplex"))
    if n == 1:
        rows.append(LPRow((mono(-1, u(1)),), ZERO, "chain1"))
    else:
        cells = [ZERO] * n
        cells[0] = mono(-1)
        rows.append(LPRow(tuple(cells), ZERO, "chain1"))
        for j in range(1, n - 1):
            cells = [ZERO] * n
            cells[j - 1] = mono(1)
            cells[j] = mono(-1)
            rows.append(LPRow(tuple(cells), ZERO, f"chain{j + 1}"))
        cells = [ZERO] * n
        cells[n - 2] = mono(1)
        cells[n - 1] = mono(-1, u(n))
        rows.append(LPRow(tuple(cells), ZERO, f"chain{n}"))
    objective = tuple(mono(1) if j == n - 1 else ZERO for j in range(n))
    return MonomialLP(n, tuple(rows), objective)


# ----------------------------------------------------------- tropicalization


def _trop_cell(cell):
    """Return (sign, leading exponent) of a cell; sign 0 for an empty cell."""
    terms = _cell_terms(cell)
    if not terms:
        return 0, NEG_INF
    signs = {1 if m.coeff > 0 else -1 for m in terms}
    if len(signs) > 1:
        raise ValueError(f"mixed-sign cell {cell!r} has no sign-consistent tropicalization")
    return signs.pop(), max(m.exponent for m in terms)


def tropicalize(lp: MonomialLP) -> TropPolyhedron:
    """Tropical system obtained by moving negative terms across and taking exponents."""
    n = lp.n
    ineqs = []
    for row in lp.rows:
        lhs = [NEG_INF] * n
        rhs = [NEG_INF] * n
        for j, cell in enumerate(row.coeffs):
            sign, e = _trop_cell(cell)
            if sign > 0:
                lhs[j] = e
            elif sign < 0:
                rhs[j] = e
        sign, e = _trop_cell(row.rhs)
        lconst = e if sign < 0 else NEG_INF
        rconst = e if sign > 0 else NEG_INF
        ineqs.append(TropInequality(TropAffineForm(tuple(lhs), lconst), TropAffineForm(tuple(rhs), rconst)))
    return TropPolyhedron(n, tuple(ineqs))


def build_tcex(n: int) -> TropPolyhedron:
    """The tropical system tcex_n, written directly (same row order as build_cex)."""
    if n < 1:
        raise ValueError("n >= 1 required")
    ineqs = []
    for i in range(1, n):
        lhs = {j - 1: -u(i) for j in range(1, i)}
        lhs[i - 1] = -u(i + 1) + 1
        rhs = {j - 1: -u(j) for j in range(i + 1, n)}
        rhs[n - 1] = Fraction(0)
        ineqs.append(TropInequality(TropAffineForm.of(n, lhs), TropAffineForm.of(n, rhs, -u(n))))
    ineqs.append(TropInequality(TropAffineForm.of(n, {j: 0 for j in range(n)}), TropAffineForm.of(n, {}, 0)))
    if n == 1:
        ineqs.append(TropInequality(TropAffineForm.of(n), TropAffineForm.of(n, {0: u(1)})))
    else:
        ineqs.append(TropInequality(TropAffineForm.of(n), TropAffineForm.of(n, {0: 0})))
        for j in range(1, n - 1):
            ineqs.append(TropInequality(TropAffineForm.of(n, {j - 1: 0}), TropAffineForm.of(n, {j: 0})))
        ineqs.append(TropInequality(TropAffineForm.of(n, {n - 2: 0}), TropAffineForm.of(n, {n - 1: u(n)})))
    return TropPolyhedron(n, tuple(ineqs))


def cost_vector(n: int) -> TropVector:
    """Tropical cost selecting x_n: (-inf, ..., -inf, 0)."""
    return tuple([NEG_INF] * (n - 1) + [Fraction(0)])


def strict_interior_perturbation(x: Sequence, eps) -> tuple:
    """x - eps * (2^{n-1}, ..., 2, 1) and whether it satisfies tcex_n strictly.

    Raises ValueError when x is not a full-support feasible point of tcex_n.
    """
    x = vec(list(x))
    n = len(x)
    eps = as_value(eps)
    P = build_tcex(n)
    if any(v is NEG_INF for v in x) or not is_feasible(P, x):
        raise ValueError("input must be a full-support point of tcex_n")
    y = tuple(x[j] - eps * 2 ** (n - 1 - j) for j in range(n))
    return y, is_strictly_feasible(P, y)


# ------------------------------------------------------------ instantiation


@dataclass(frozen=True)
class RationalPolytope:
    """{x : A x <= b} with exact rational data, plus the linear objective."""

    A: tuple
    b: tuple
    c: tuple
    s: Fraction
    labels: tuple = field(default_factory=tuple)

    @property
    def t(self) -> Fraction:
        return self.s * self.s

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.A)

    def slacks(self, x: Sequence[Fraction]) -> list:
        return [bi - sum(a * xj for a, xj in zip(row, x)) for row, bi in zip(self.A, self.b)]

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(sl >= 0 for sl in self.slacks(x))

    def to_text(self) -> str:
        """One row per line: a_1 ... a_n b, fractions written p/q."""
        return "\n".join(" ".join(_frac_str(v) for v in (*row, bi)) for row, bi in zip(self.A, self.b)) + "\n"

    @classmethod
    def from_text(cls, text: str, s=1) -> "RationalPolytope":
        rows = [[Fraction(tok) for tok in line.split()] for line in text.splitlines() if line.strip()]
        n = len(rows[0]) - 1
        c = tuple(Fraction(1) if j == n - 1 else Fraction(0) for j in range(n))
        return cls(tuple(tuple(r[:-1]) for r in rows), tuple(r[-1] for r in rows), c, Fraction(s))


def _inst_cell(cell, s: Fraction) -> Fraction:
    total = Fraction(0)
    for m in _cell_terms(cell):
        k = 2 * m.exponent
        if k.denominator != 1:
            raise ValueError(f"exponent {m.exponent} is not a half-integer; cannot instantiate exactly")
        total += m.coeff * s ** int(k)
    return total


def instantiate(lp: MonomialLP, s) -> RationalPolytope:
    """Exact polytope at t = s**2 (s rational, s > 1)."""
    s = Fraction(s) if not isinstance(s, str) else Fraction(s)
    if s <= 1:
        raise ValueError("s must exceed 1")
    A = tuple(tuple(_inst_cell(cell, s) for cell in row.coeffs) for row in lp.rows)
    b = tuple(_inst_cell(row.rhs, s) for row in lp.rows)
    c = tuple(_inst_cell(cell, s) for cell in lp.objective)
    return RationalPolytope(A, b, c, s, tuple(r.label for r in lp.rows))


def cex_polytope(n: int, s) -> RationalPolytope:
    return instantiate(build_cex(n), s)


# ------------------------------------------------------- exact linear algebra


def solve_exact(M: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Gaussian elimination over Q.  Returns the solution or None if singular."""
    n = len(M)
    aug = [list(row) + [r] for row, r in zip(M, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] / p
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(aug[i][n] / aug[i][i] for i in range(n))


def fm_feasible(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], equalities: Sequence[int] = ()) -> bool:
    """Decide nonemptiness of {A x <= b, A_k x = b_k for k in equalities} exactly.

    Equalities are eliminated by substitution; the remaining variables by
    Fourier-Motzkin with duplicate-row pruning.
    """
    rows = [(list(map(Fraction, a)), Fraction(bi)) for a, bi in zip(A, b)]
    n = len(rows[0][0]) if rows else 0
    eqs = [rows[k] for k in equalities]
    ineqs = [r for r in rows]
    # substitute each equality, pivoting on its first nonzero coefficient
    while eqs:
        a, bi = eqs.pop()
        j = next((k for k, v in enumerate(a) if v != 0), None)
        if j is None:
            if bi != 0:
                return False
            continue

        def sub(row):
            r, rb = row
            if r[j] == 0:
                return row
            f = r[j] / a[j]
            return [x - f * y for x, y in zip(r, a)], rb - f * bi

        eqs = [sub(e) for e in eqs]
        ineqs = [sub(r) for r in ineqs]
    for j in range(n):
        pos, neg, zero = [], [], []
        for a, bi in ineqs:
            (pos if a[j] > 0 else neg if a[j] < 0 else zero).append((a, bi))
        new = list(zero)
        for ap, bp in pos:
            for an, bn in neg:
                fp, fn = -an[j], ap[j]
                new.append(([fp * x + fn * y for x, y in zip(ap, an)], fp * bp + fn * bn))
        ineqs = _dedupe(new)
    return all(bi >= 0 for _, bi in ineqs)


def _dedupe(rows):
    """Keep one row per direction (the tightest), normalized by the first nonzero entry."""
    best = {}
    const_ok = True
    for a, bi in rows:
        scale = next((abs(v) for v in a if v != 0), None)
        if scale is None:
            const_ok = const_ok and bi >= 0
            continue
        key = tuple(v / scale for v in a)
        nb = bi / scale
        if key not in best or nb < best[key]:
            best[key] = nb
    out = [(list(k), v) for k, v in best.items()]
    if not const_ok:
        out.append(([Fraction(0)] * len(rows[0][0]), Fraction(-1)))
    return out


# ----------------------------------------------------- vertices and faces


@dataclass
class FaceLatticeReport:
    vertices: list
    facet_incidence: list
    is_cube: bool
    facet_pairs: list
    simple: bool = False
    labels: tuple = ()

    def to_json(self) -> dict:
        return {
            "vertices": [[_frac_str(v) for v in p] for p in self.vertices],
            "vertices_float": [[float(v) for v in p] for p in self.vertices],
            "facet_incidence": [sorted(s) for s in self.facet_incidence],
            "is_cube": self.is_cube,
            "simple": self.simple,
            "facet_pairs": [list(p) for p in self.facet_pairs],
            "labels": list(self.labels),
        }


def enumerate_vertices(p: RationalPolytope) -> FaceLatticeReport:
    """All vertices by exhaustive basis enumeration over n-subsets of rows."""
    n, m = p.n, p.m
    if n > MAX_ENUM_DIM:
        raise ValueError(f"vertex enumeration is limited to n <= {MAX_ENUM_DIM}")
    found = {}
    for basis in itertools.combinations(range(m), n):
        x = solve_exact([p.A[i] for i in basis], [p.b[i] for i in basis])
        if x is None or not p.contains(x):
            continue
        found.setdefault(x, None)
    vertices = sorted(found)
    incidence = [frozenset(i for i, sl in enumerate(p.slacks(x)) if sl == 0) for x in vertices]
    simple = all(len(s) == n for s in incidence)
    pairs = _disjoint_pairs(incidence, m)
    is_cube = _cube_like(vertices, incidence, pairs, n, m, simple)
    return FaceLatticeReport(vertices, incidence, is_cube, pairs, simple, p.labels)


def _disjoint_pairs(incidence, m):
    on = [frozenset(k for k, s in enumerate(incidence) if i in s) for i in range(m)]
    pairs = []
    for i in range(m):
        partners = [j for j in range(m) if j != i and on[i] and on[j] and not (on[i] & on[j])]
        if len(partners) == 1 and i < partners[0]:
            pairs.append((i, partners[0]))
    return pairs


def _cube_like(vertices, incidence, pairs, n, m, simple) -> bool:
    if len(vertices) != 2**n or not simple or m != 2 * n or len(pairs) != n:
        return False
    if sorted(i for p in pairs for i in p) != list(range(m)):
        return False
    patterns = set()
    for s in incidence:
        bits = []
        for a, b in pairs:
            if (a in s) == (b in s):
                return False
            bits.append(a in s)
        patterns.add(tuple(bits))
    return len(patterns) == 2**n


def faces_disjoint(p: RationalPolytope, i: int, j: int) -> bool:
    """Whether the faces where rows i and j are tight have empty intersection."""
    return not fm_feasible(p.A, p.b, (i, j))


def _row(p: RationalPolytope, label: str) -> int:
    return p.labels.index(label)


def check_disjoint_faces(p: RationalPolytope) -> bool:
    """Faces {sum x = 1} and {x_{n-1} = t^{u_n} x_n} do not meet (n >= 2)."""
    n = p.n
    if n < 2:
        return True
    return faces_disjoint(p, _row(p, "simplex"), _row(p, f"chain{n}"))


@dataclass(frozen=True)
class FacetPair:
    i: int
    chain_row: int
    coupling_row: int
    disjoint: bool


def check_facet_pairing(p: RationalPolytope) -> list:
    """For i = 1..n-2, decide whether {x_i = x_{i+1}} misses the (i+1)-th coupling face."""
    n = p.n
    out = []
    for i in range(1, n - 1):
        a, b = _row(p, f"chain{i + 1}"), _row(p, f"coupling{i + 1}")
        out.append(FacetPair(i, a, b, faces_disjoint(p, a, b)))
    return out


def pairing_threshold(n: int, s_values=(Fraction(5, 4), Fraction(3, 2), 2, 3, 4, 8, 16)) -> Fraction | None:
    """Smallest tested t = s^2 at which every pairing and the simplex/chain pair are disjoint."""
    for s in s_values:
        p = cex_polytope(n, s)
        if check_disjoint_faces(p) and all(fp.disjoint for fp in check_facet_pairing(p)):
            return p.t
    return None
