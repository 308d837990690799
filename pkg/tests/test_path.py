import functools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import PATH_TABLE_TYPO, gamma_expected, path_table_columns
from tropipm.cex import build_tcex, cost_vector, u
from tropipm.path import (
    BreakpointPath,
    MalformedPathError,
    Tube,
    cex_gamma,
    cex_path_breakpoints,
    cex_tropical_path_point,
    distance_to_path,
    extract_breakpoints,
    gamma,
    generic_tropical_path_point,
    reconstruct_from_runs,
    segment_runs,
    tube_contains,
)
from tropipm.tropical import trop_segment_decompose, vec


def S(*idx):
    """1-based support literal."""
    return frozenset(i - 1 for i in idx)


class TestClosedForm:
    def test_examples(self):
        assert cex_tropical_path_point(3, 5) == vec(-3, -1, -5)
        assert cex_tropical_path_point(4, 17) == vec(-9, -7, -6, -17)
        assert cex_tropical_path_point(3, -1) == vec(0, 0, 0)

    def test_one_dimensional(self):
        for lam in (-2, 0, Fraction(3, 2), 7):
            assert cex_tropical_path_point(1, lam) == (min(Fraction(0), -Fraction(lam)),)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_table_cells(self, n):
        for lam, col in path_table_columns(n):
            if (n, lam) == PATH_TABLE_TYPO[:2]:
                continue
            assert cex_tropical_path_point(n, lam) == col, (n, lam)

    def test_table_typo_cell(self):
        n, lam, i, printed, derived = PATH_TABLE_TYPO
        got = cex_tropical_path_point(n, lam)
        assert got[i] == derived != printed
        # the printed value would drop x_2 by 2 over a unit lambda step
        assert cex_tropical_path_point(n, lam - 1)[i] - printed == 2

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_barycenter(self, n):
        K, c = build_tcex(n), cost_vector(n)
        for k in range(int(4 * u(n)) + 1):
            lam = Fraction(k, 2)
            assert cex_tropical_path_point(n, lam) == generic_tropical_path_point(K, c, lam)

    def test_last_coordinate(self):
        for n in range(1, 7):
            for lam in (-1, 0, 3, Fraction(41, 3)):
                assert cex_tropical_path_point(n, lam)[-1] == min(-Fraction(lam), Fraction(0))

    def test_generic_examples(self):
        assert generic_tropical_path_point(build_tcex(2), cost_vector(2), 3) == vec(-1, -3)
        assert generic_tropical_path_point(build_tcex(3), cost_vector(3), 8) == vec(-4, -3, -8)
        assert generic_tropical_path_point(build_tcex(3), cost_vector(3), -10) == vec(0, 0, 0)

    @settings(max_examples=200)
    @given(st.integers(1, 6), st.fractions(-3, 130, max_denominator=16), st.fractions(0, 40, max_denominator=16))
    def test_monotone_unit_lipschitz(self, n, lam2, gap):
        lam1 = lam2 - gap
        a, b = cex_tropical_path_point(n, lam2), cex_tropical_path_point(n, lam1)
        assert all(x <= y <= x + gap for x, y in zip(a, b))


class TestBreakpoints:
    def test_n2(self):
        p = cex_path_breakpoints(2, 0, 4)
        assert p.lambdas == [0, 1, 2, 3, 4]
        assert list(p.supports) == [S(2), S(1, 2), S(2), S(1, 2)]

    def test_n3_middle(self):
        p = cex_path_breakpoints(3, 4, 6)
        assert p.lambdas == [4, 5, 6]
        assert list(p.supports) == [S(1, 2, 3), S(3)]

    def test_n1(self):
        p = cex_path_breakpoints(1, 0, 5)
        assert p.lambdas == [0, 5] and list(p.supports) == [S(1)]

    def test_synthetic_endpoints(self):
        p = cex_path_breakpoints(3, Fraction(1, 3), Fraction(17, 2))
        assert p.interval == (Fraction(1, 3), Fraction(17, 2))

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_evaluation_agrees(self, n):
        p = cex_path_breakpoints(n, -1, 2 * u(n) + 2)
        for k in range(-4, int(8 * u(n)) + 9):
            lam = Fraction(k, 4)
            assert p.evaluate(lam) == cex_tropical_path_point(n, lam)

    def test_rejects_bad_slopes(self):
        with pytest.raises(MalformedPathError):
            BreakpointPath.from_points([(0, (0, 0)), (2, (-1, -2))])
        with pytest.raises(MalformedPathError):
            BreakpointPath(((0, vec(0)), (0, vec(0))), (S(),))
        with pytest.raises(MalformedPathError):
            BreakpointPath(((0, vec(0, 0)), (1, vec(-1, 0))), (S(2),))

    def test_csv_and_json(self):
        p = cex_path_breakpoints(2, 0, 4)
        lines = p.to_csv().splitlines()
        assert lines[0] == "lambda,x1,x2" and lines[2] == "1,0,-1"
        assert BreakpointPath.from_json(p.to_json()) == p


@functools.lru_cache(maxsize=None)
def _is_one_segment(path, a, b):
    """Breakpoints a..b coincide with the decomposition of tsegm(P_a, P_b)."""
    pts = path.points
    dec = trop_segment_decompose(pts[a], pts[b])
    inner = list(pts[a:b + 1])
    # coarser breakpoint lists are fine when consecutive pieces are collinear
    return all(_on_polyline(dec.breakpoints, x) for x in inner)


def _on_polyline(bps, x):
    for p, q in zip(bps, bps[1:]):
        ts = {(xi - pi) / (qi - pi) for pi, qi, xi in zip(p, q, x) if qi != pi}
        if len(ts) == 1 and 0 <= next(iter(ts)) <= 1 and all(xi == pi for pi, qi, xi in zip(p, q, x) if qi == pi):
            return True
        if all(xi == pi for pi, xi in zip(p, x)):
            return True
    return x == bps[-1]


def gamma_by_dp(path):
    """Minimal segment count over all ways to cut the breakpoint list."""
    m = len(path.points) - 1
    best = [0] + [None] * m
    for b in range(1, m + 1):
        best[b] = min(best[a] + 1 for a in range(b) if _is_one_segment(path, a, b))
    return best[m]


class TestGamma:
    def test_examples(self):
        assert cex_gamma(3, 0, 10) == 7
        assert cex_gamma(3, 0, 4) == 3
        assert cex_gamma(2, 0, 3) == 2
        assert cex_gamma(3, 4, 6) == 1

    @pytest.mark.parametrize("n", range(1, 9))
    def test_canonical_intervals(self, n):
        un = u(n)
        assert (cex_gamma(n, 0, un - 1), cex_gamma(n, 0, 2 * un - 1), cex_gamma(n, 0, 2 * un)) == gamma_expected(n)

    def test_beyond_2un_adds_nothing(self):
        for n in range(1, 6):
            assert cex_gamma(n, 0, 2 * u(n)) == cex_gamma(n, 0, 4 * u(n) + 7)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_recursion(self, n):
        un = u(n)
        for lam in range(int(un) + 1, int(3 * un) + 1):
            assert cex_gamma(n, 0, lam) == 2 ** (n - 1) + cex_gamma(n - 1, 0, lam - (un + 1))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_greedy_is_optimal(self, n):
        for hi in range(1, int(2 * u(n)) + 2):
            p = cex_path_breakpoints(n, 0, hi)
            assert gamma(p) == gamma_by_dp(p)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_reconstruction(self, n):
        p = cex_path_breakpoints(n, 0, 2 * u(n))
        assert reconstruct_from_runs(p) == p.points
        for a, b in segment_runs(p):
            sets = [p.supports[k] for k in range(a, b)]
            assert all(y < x for x, y in zip(sets, sets[1:]))

    def test_constant_prefix_is_ignored(self):
        assert cex_gamma(3, -5, 10) == 7


class TestTube:
    def test_own_breakpoints(self):
        p = cex_path_breakpoints(3, 0, 10)
        assert tube_contains(Tube(p, Fraction(1, 100)), p.points)

    def test_translation(self):
        p = cex_path_breakpoints(3, 0, 10)
        eps = Fraction(1, 2)
        half = [tuple(x + eps / 2 for x in q) for q in p.points]
        far = [tuple(x + 2 * eps for x in q) for q in p.points]
        assert tube_contains(Tube(p, eps), half)
        assert not tube_contains(Tube(p, eps), far)

    def test_distance_exact_on_piece(self):
        p = cex_path_breakpoints(2, 0, 4)
        # (1/2, -1): best lambda is where both coordinates are 1/2 away
        assert distance_to_path(p, vec("1/2", -1)) == Fraction(1, 2)

    def test_radius_positive(self):
        with pytest.raises(ValueError):
            Tube(cex_path_breakpoints(2, 0, 1), 0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tube_contains(Tube(cex_path_breakpoints(2, 0, 1), 1), [vec(0, 0, 0)])


class TestGenericExtraction:
    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_closed_form(self, n):
        hi = 2 * u(n)
        got = extract_breakpoints(build_tcex(n), cost_vector(n), 0, hi)
        assert not got.unresolved
        assert got.path == cex_path_breakpoints(n, 0, hi)

    def test_unresolved_flagged(self):
        # three kinks inside one interval already at the resolution
        got = extract_breakpoints(build_tcex(2), cost_vector(2), 0, 4, resolution=4)
        assert got.unresolved
