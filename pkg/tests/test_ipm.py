import random
from fractions import Fraction

import pytest

from tropipm.cex import build_cex, cex_polytope, enumerate_vertices
from tropipm.experiments import vertex_log_deviation
from tropipm.ipm import (
    PRECONDITION_UNMET,
    IPMConfig,
    LogBarrier,
    NotFeasibleError,
    center_sweep,
    centered_points,
    duality_gap_check,
    hessian_lower_bound_check,
    hessian_upper_bound_check,
    in_mult_neighborhood,
    in_step_neighborhood,
    lifted_start,
    log_bound_check,
    newton_center,
    phase_one,
    phi,
    phi_band,
    predictor_corrector,
    predictor_corrector_level,
    recenter_in_level,
    working_precision,
)


def interior_points(p, count, seed):
    """Exact strictly positive convex combinations of the vertices."""
    verts = enumerate_vertices(p).vertices
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        w = [Fraction(rng.randint(1, 50)) for _ in verts]
        tot = sum(w)
        out.append(tuple(sum(wi * v[j] for wi, v in zip(w, verts)) / tot for j in range(p.n)))
    return out


@pytest.fixture(scope="module")
def bar3():
    return LogBarrier.from_polytope(cex_polytope(3, 10))


class TestBarrier:
    def test_monomial_evaluation_matches_exact(self):
        a = LogBarrier.from_polytope(cex_polytope(3, 10))
        b = LogBarrier.from_monomial_lp(build_cex(3), 100)
        assert all(abs(x - y) <= abs(x) * 2**-240 for r, s in zip(a.A, b.A) for x, y in zip(r, s))
        assert all(abs(x - y) <= abs(x) * 2**-240 for x, y in zip(a.b, b.b))

    def test_t_must_exceed_one(self):
        with pytest.raises(ValueError):
            LogBarrier.from_monomial_lp(build_cex(2), 1)

    def test_outside_raises(self, bar3):
        with pytest.raises(NotFeasibleError):
            bar3.value([0, 0, 0])
        with pytest.raises(NotFeasibleError):
            bar3.gradient([2, 0, 0])

    def test_gradient_by_finite_differences(self, bar3):
        ctx = bar3.ctx
        h = ctx.mpf(2) ** -90
        for x in interior_points(cex_polytope(3, 10), 20, seed=1):
            x = bar3.vector(x)
            g = bar3.gradient(x)
            for j in range(3):
                step = h * x[j]
                up, dn = list(x), list(x)
                up[j] += step
                dn[j] -= step
                fd = (bar3.value(up) - bar3.value(dn)) / (2 * step)
                assert abs(fd - g[j]) <= abs(g[j]) * 2**-100 + 2**-100

    def test_hessian_symmetric_positive_definite(self, bar3):
        for x in interior_points(cex_polytope(3, 10), 10, seed=2):
            H = bar3.hessian(bar3.vector(x))
            assert all(H[i, j] == H[j, i] for i in range(3) for j in range(3))
            ev = bar3.ctx.eigsy(H, eigvals_only=True)
            assert min(ev[i] for i in range(3)) > 0

    def test_theta_and_K(self, bar3):
        assert bar3.theta == 6 and bar3.K == 25


class TestCentering:
    def test_center_tropicalizes(self):
        t = 1000
        bar = LogBarrier.from_monomial_lp(build_cex(3), t, working_precision(3, t))
        ctx = bar.ctx
        c = [0, 0, 1]
        etas = [ctx.mpf(t) ** k for k in range(0, 6)]
        res = center_sweep(bar, c, etas, lifted_start(bar, t))[-1]
        logs = [ctx.log(v) / ctx.log(t) for v in res.x]
        assert max(abs(a - b) for a, b in zip(logs, (-3, -1, -5))) < 0.35

    def test_decrement_reached(self, bar3):
        r = newton_center(bar3, [0, 0, 1], 50, lifted_start(bar3, 100), tol=Fraction(1, 1000))
        assert r.decrement <= 0.001
        assert in_step_neighborhood(bar3, [0, 0, 1], r.x, 50, Fraction(1, 4))

    def test_objective_decreases_along_sweep(self, bar3):
        rs = center_sweep(bar3, [0, 0, 1], [1, 4, 16, 64, 256], lifted_start(bar3, 100), tol=Fraction(1, 10**6))
        objs = [r.x[2] for r in rs]
        assert all(b < a for a, b in zip(objs, objs[1:]))

    def test_recenter_keeps_level(self, bar3):
        x = bar3.vector(lifted_start(bar3, 100))
        r = recenter_in_level(bar3, [0, 0, 1], x, Fraction(1, 10**8))
        assert abs(r.x[2] - x[2]) < 2**-200

    def test_recenter_recovers_eta(self, bar3):
        center = newton_center(bar3, [0, 0, 1], 50, lifted_start(bar3, 100), tol=Fraction(1, 10**30)).x
        r = recenter_in_level(bar3, [0, 0, 1], center, Fraction(1, 10**20))
        assert abs(r.eta - 50) < 1e-15

    def test_infeasible_start(self, bar3):
        with pytest.raises(NotFeasibleError):
            newton_center(bar3, [0, 0, 1], 1, [1, 1, 1])


class TestPredictorCorrector:
    @pytest.fixture(scope="class")
    @staticmethod
    def run():
        bar = LogBarrier.from_polytope(cex_polytope(2, 10))
        x0 = lifted_start(bar, 100)
        return bar, predictor_corrector(bar, [0, 1], x0, bar.ctx.mpf(100) ** -3)

    def test_invariants(self, run):
        bar, traj = run
        assert traj.iterates[0].kind == "start"
        assert all(bar.is_interior(x) for x in traj.points())
        objs = [it.obj for it in traj.iterates]
        assert all(b <= a for a, b in zip(objs, objs[1:]))
        etas = [it.eta for it in traj.iterates if it.kind != "predictor"]
        assert all(b >= a * (1 - Fraction(1, 100)) for a, b in zip(etas, etas[1:]))
        assert traj.iterates[-1].obj <= bar.ctx.mpf(100) ** -3

    def test_sigma_variants_take_several_steps(self):
        bar = LogBarrier.from_polytope(cex_polytope(2, 10))
        target = bar.ctx.mpf(100) ** -3
        counts = {}
        for sigma in (Fraction(1, 2), Fraction(9, 10)):
            traj = predictor_corrector(bar, [0, 1], lifted_start(bar, 100), target, IPMConfig(sigma=sigma))
            counts[sigma] = traj.predictor_steps
        assert all(v >= 3 for v in counts.values())
        assert counts[Fraction(9, 10)] <= counts[Fraction(1, 2)]

    def test_duality_gap_on_centers(self, run):
        bar, traj = run
        rep = duality_gap_check(bar, [0, 1], centered_points(traj))
        assert rep.ok and rep.max_product <= 4

    def test_csv(self, run):
        _, traj = run
        lines = traj.to_csv().splitlines()
        assert lines[0] == "iter,kind,eta,obj,x1,x2"
        assert lines[1].startswith("0,start,")
        assert len(lines) == len(traj.iterates) + 1

    def test_config_validation(self):
        for kw in ({"sigma": 0}, {"sigma": 1}, {"rho": Fraction(1, 2)}, {"band": (2, 3)}):
            with pytest.raises(ValueError):
                IPMConfig(**kw)


class TestNeighborhoodBand:
    def test_unit_example(self):
        lo, hi = phi_band(1, 1)
        assert abs(lo - 0.15859) < 1e-4 and abs(hi - 3.14619) < 1e-4
        assert abs(phi(lo) - 1) < 1e-15 and abs(phi(hi) - 1) < 1e-15

    def test_shrinks_to_one(self):
        lo, hi = phi_band(Fraction(1, 10**6), 1)
        assert 0.99 < lo < 1 < hi < 1.01

    def test_nested(self):
        a, b = phi_band(1, 2), phi_band(2, 2)
        assert b[0] < a[0] < 1 < a[1] < b[1]

    def test_level_formula(self):
        assert abs(predictor_corrector_level(4, Fraction(1, 2)) - (4 * 0.6931471805599453 + 1 / 154)) < 1e-12

    def test_positive_level_required(self):
        with pytest.raises(ValueError):
            phi_band(0, 1)

    def test_multiplicative_membership(self):
        assert in_mult_neighborhood([1, 2], [1, 1], 0.5, 2)
        assert not in_mult_neighborhood([1, 2.5], [1, 1], 0.5, 2)


class TestBarrierInequalities:
    def test_interval_barrier(self):
        # 0 <= x <= 1: H = 1/x^2 + 1/(1-x)^2 >= 1/x^2
        bar = LogBarrier([[1], [-1]], [1, 0])
        for x in ("1/10", "1/2", "9/10"):
            assert hessian_lower_bound_check(bar, [Fraction(x)])

    def test_precondition_unmet_near_simplex(self):
        p = cex_polytope(3, 10)
        bar = LogBarrier.from_polytope(p)
        rep = enumerate_vertices(p)
        mid = interior_points(p, 1, seed=5)[0]
        on_simplex = [v for v, inc in zip(rep.vertices, rep.facet_incidence) if p.labels.index("simplex") in inc]
        assert on_simplex
        for v in on_simplex:
            x = [Fraction(999, 1000) * a + Fraction(1, 1000) * b for a, b in zip(v, mid)]
            # scaling any coordinate by K + 2 leaves the polytope
            assert hessian_upper_bound_check(bar, x) is PRECONDITION_UNMET

    def test_log_bound_equal_points(self, bar3):
        x = interior_points(cex_polytope(3, 10), 1, seed=3)[0]
        assert log_bound_check(bar3, x, x)

    def test_log_bound_random_pairs(self, bar3):
        pts = interior_points(cex_polytope(3, 10), 20, seed=4)
        for x, y in zip(pts, pts[1:]):
            assert log_bound_check(bar3, x, y)


class TestPrecisionAndStart:
    def test_working_precision(self):
        assert working_precision(2, 100) == 256
        assert working_precision(3, 1000) == 448
        assert working_precision(3, 1000) % 64 == 0

    def test_lifted_start_is_interior(self):
        for n in (2, 3, 4):
            bar = LogBarrier.from_polytope(cex_polytope(n, 10))
            assert bar.is_interior(lifted_start(bar, 100))

    def test_phase_one(self, bar3):
        x = phase_one(bar3, [1, 1, 1])
        assert bar3.is_interior(x)

    def test_phase_one_keeps_interior_start(self, bar3):
        x0 = bar3.vector(lifted_start(bar3, 100))
        assert phase_one(bar3, x0) == x0


class TestVertexDeviation:
    @pytest.mark.slow
    def test_shrinks_with_t(self):
        d2, d4 = vertex_log_deviation(3, 100), vertex_log_deviation(3, 10**4)
        assert d2 < 0.01 and d4 < d2
