import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tropipm.cex import build_tcex, cost_vector
from tropipm.path import cex_tropical_path_point
from tropipm.polyhedron import (
    EmptyError,
    TropAffineForm,
    TropInequality,
    TropPolyhedron,
    UnboundedError,
    UnconvergedError,
    add_level_constraint,
    barycenter,
    distance_to,
    greatest_point_below,
    is_feasible,
    is_strictly_feasible,
    upper_bound,
    within_distance,
)
from tropipm.tropical import NEG_INF, leq, trop_segment_point, vec


def random_feasible(P, rng, scale=12):
    """Greatest feasible point below a random bound: always feasible, varied."""
    while True:
        u = tuple(Fraction(rng.randint(-scale * 4, 0), 4) for _ in range(P.n))
        try:
            return greatest_point_below(P, u)
        except EmptyError:
            continue


class TestFeasibility:
    def test_tcex3_examples(self):
        P = build_tcex(3)
        assert is_feasible(P, vec(0, 0, 0))
        assert is_feasible(P, vec(-3, -1, -5))
        assert not is_feasible(P, vec(1, 0, 0))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            is_feasible(build_tcex(2), vec(0, 0, 0))

    def test_strict(self):
        P = build_tcex(2)
        assert not is_strictly_feasible(P, vec(0, 0))
        assert is_strictly_feasible(P, vec("-1/2", "-1/4"))


class TestLevelConstraint:
    def test_unit_cost_row(self):
        P = add_level_constraint(build_tcex(2), cost_vector(2), 2)
        q = P.ineqs[-1]
        assert q.lhs.coeffs == vec("-inf", 0) and q.rhs.constant == -2

    def test_full_cost(self):
        P = add_level_constraint(build_tcex(2), vec(0, 0), 1)
        assert not is_feasible(P, vec(-1, 0))
        assert is_feasible(P, vec(-1, -1))

    def test_vacuous(self):
        P = add_level_constraint(build_tcex(2), vec("-inf", "-inf"), 0)
        assert P.ineqs[-1].satisfied(vec(0, 0))


class TestGreatestPointBelow:
    def test_example(self):
        P = add_level_constraint(build_tcex(2), cost_vector(2), 2)
        assert greatest_point_below(P, vec(0, 0)) == vec(-1, -2)

    def test_feasible_bound_is_fixed(self):
        P = build_tcex(3)
        assert greatest_point_below(P, vec(-3, -1, -5)) == vec(-3, -1, -5)

    def test_empty(self):
        # 0 <= x_1 <= -inf has no solution
        P = TropPolyhedron(1, (TropInequality(TropAffineForm.of(1, {}, 0), TropAffineForm.of(1, {0: 0})),
                               TropInequality(TropAffineForm.of(1, {0: 0}), TropAffineForm.of(1, {}, NEG_INF))))
        with pytest.raises(EmptyError):
            greatest_point_below(P, vec(0))

    def test_unconverged(self):
        P = add_level_constraint(build_tcex(3), cost_vector(3), 5)
        with pytest.raises(UnconvergedError):
            greatest_point_below(P, vec(0, 0, 0), max_iters=1)

    def test_collapse_to_bottom(self):
        # x_1 <= -10^7 + x_1 only holds at -inf; one clamp crosses the floor
        P = TropPolyhedron(1, (TropInequality(TropAffineForm.of(1, {0: 0}), TropAffineForm.of(1, {0: -10**7})),))
        assert greatest_point_below(P, vec(0)) == (NEG_INF,)

    def test_slow_descent_reports_unconverged(self):
        P = TropPolyhedron(1, (TropInequality(TropAffineForm.of(1, {0: 0}), TropAffineForm.of(1, {0: -1})),))
        with pytest.raises(UnconvergedError):
            greatest_point_below(P, vec(0))

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_greatest_feasible_below(self, n):
        rng = random.Random(n)
        P = build_tcex(n)
        for _ in range(10):
            u = tuple(Fraction(rng.randint(-40, 4), 4) for _ in range(n))
            g = greatest_point_below(P, u)
            assert is_feasible(P, g) and leq(g, u)
            assert greatest_point_below(P, g) == g
            for _ in range(100):
                y = random_feasible(P, rng)
                y = tuple(min(a, b) for a, b in zip(y, u))
                if is_feasible(P, y):
                    assert leq(y, g)

    @settings(max_examples=60)
    @given(st.lists(st.fractions(-8, 2, max_denominator=4), min_size=3, max_size=3),
           st.lists(st.fractions(0, 3, max_denominator=4), min_size=3, max_size=3))
    def test_monotone_in_bound(self, u, bump):
        P = build_tcex(3)
        u2 = [a + b for a, b in zip(u, bump)]
        assert leq(greatest_point_below(P, u), greatest_point_below(P, u2))


class TestBarycenter:
    def test_examples(self):
        assert barycenter(add_level_constraint(build_tcex(3), cost_vector(3), 5)) == vec(-3, -1, -5)
        assert barycenter(add_level_constraint(build_tcex(4), cost_vector(4), 11)) == vec(-6, -6, -1, -11)
        assert barycenter(add_level_constraint(build_tcex(3), cost_vector(3), -2)) == vec(0, 0, 0)

    def test_upper_bound_from_simplex_row(self):
        assert upper_bound(build_tcex(3)) == vec(0, 0, 0)

    def test_unbounded(self):
        P = TropPolyhedron(2, (TropInequality(TropAffineForm.of(2, {0: 0}), TropAffineForm.of(2, {1: 0})),))
        with pytest.raises(UnboundedError):
            barycenter(P)


class TestTropicalConvexity:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_segments_stay_feasible(self, n):
        rng = random.Random(100 + n)
        P = build_tcex(n)
        for _ in range(10):
            u, v = random_feasible(P, rng), random_feasible(P, rng)
            if {i for i, a in enumerate(u) if a is NEG_INF} != {i for i, a in enumerate(v) if a is NEG_INF}:
                continue
            for _ in range(10):
                w = Fraction(-rng.randint(0, 80), 8)
                lam, mu = (Fraction(0), w) if rng.random() < 0.5 else (w, Fraction(0))
                assert is_feasible(P, trop_segment_point(u, v, lam, mu))


class TestDistance:
    def test_feasible_point_has_zero_distance(self):
        assert distance_to(build_tcex(3), cex_tropical_path_point(3, 7)) == 0

    def test_distance_one(self):
        d = distance_to(build_tcex(3), vec(1, 0, 0), Fraction(1, 2**10))
        assert 1 <= d <= 1 + Fraction(1, 2**10)
        assert within_distance(build_tcex(3), vec(1, 0, 0), 1)
        assert not within_distance(build_tcex(3), vec(1, 0, 0), Fraction(99, 100))


class TestJson:
    def test_round_trip(self):
        P = add_level_constraint(build_tcex(3), cost_vector(3), "5/2")
        assert TropPolyhedron.from_json(P.to_json()) == P
        data = P.to_json()
        assert set(data) == {"n", "ineqs"} and set(data["ineqs"][0]) == {"lhs", "rhs"}
        assert set(data["ineqs"][0]["lhs"]) == {"coeffs", "const"}
