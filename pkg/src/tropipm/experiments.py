"""Experiment drivers shared by the CLI and the acceptance suite.

Every driver returns a plain report object with ``to_json``; the JSON carries
``schema_version`` so downstream parsers can detect layout changes.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import ipm
from .cex import (
    build_cex,
    build_tcex,
    cex_polytope,
    check_disjoint_faces,
    check_facet_pairing,
    enumerate_vertices,
    u,
)
from .path import Tube, cex_gamma, cex_path_breakpoints, cex_tropical_path_point, distance_to_path
from .polyhedron import distance_to
from .tropical import NEG_INF

SCHEMA_VERSION = 1


def _f(q) -> str:
    if q is NEG_INF:
        return "-inf"
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def grid(lo, hi, step) -> list:
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    count = int((hi - lo) / step) + 1
    return [lo + k * step for k in range(count)]


# ------------------------------------------------------------- tropical path


def troppath_rows(n: int, lam_max, step=1) -> list:
    return [(lam, cex_tropical_path_point(n, lam)) for lam in grid(0, lam_max, step)]


def troppath_csv(n: int, lam_max, step=1) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda"] + [f"x{i + 1}" for i in range(n)])
    for lam, p in troppath_rows(n, lam_max, step):
        w.writerow([_f(lam)] + [_f(v) for v in p])
    return buf.getvalue()


def gamma_summary(n: int, lo=None, hi=None) -> dict:
    un = u(n)
    out = {
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "canonical": {
            "[0,u_n-1]": cex_gamma(n, 0, un - 1),
            "[0,2u_n-1]": cex_gamma(n, 0, 2 * un - 1),
            "[0,2u_n]": cex_gamma(n, 0, 2 * un),
        },
    }
    if lo is not None:
        out["interval"] = [_f(lo), _f(hi)]
        out["gamma"] = cex_gamma(n, lo, hi)
    return out


# ------------------------------------------------------------- convergence


def log_image(bar: ipm.LogBarrier, x, t) -> list:
    ctx = bar.ctx
    lt = ctx.log(ipm._to_mpf(ctx, t))
    return [ctx.log(v) / lt for v in x]


def _deviation(bar, x, t, point) -> float:
    ctx = bar.ctx
    return float(max(abs(a - ipm._to_mpf(ctx, b)) for a, b in zip(log_image(bar, x, t), point)))


@dataclass
class ConvergenceReport:
    n: int
    t_list: list
    lambdas: list
    deviations: dict  # t -> list of deviations (None for failed cells)
    failures: list = field(default_factory=list)
    delta_hat: dict = field(default_factory=dict)

    def max_deviation(self, t) -> float:
        return max(d for d in self.deviations[t] if d is not None)

    def gamma_hat(self, t) -> float:
        return self.max_deviation(t) * math.log(float(t))

    @property
    def consistent(self) -> bool:
        m = [self.max_deviation(t) for t in self.t_list]
        return all(a > b for a, b in zip(m, m[1:]))

    @property
    def gamma_hat_ratio(self) -> float:
        g = [self.gamma_hat(t) for t in self.t_list]
        return max(g) / min(g)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "t_list": [_f(t) for t in self.t_list],
            "lambdas": [_f(l) for l in self.lambdas],
            "deviations": {_f(t): self.deviations[t] for t in self.t_list},
            "max_deviation": {_f(t): self.max_deviation(t) for t in self.t_list},
            "gamma_hat": {_f(t): self.gamma_hat(t) for t in self.t_list},
            "gamma_hat_ratio": self.gamma_hat_ratio,
            "delta_hat": {_f(t): v for t, v in self.delta_hat.items()},
            "failures": self.failures,
            "verdict": "consistent" if self.consistent else "inconsistent",
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "lambda", "deviation"])
        for t in self.t_list:
            for lam, d in zip(self.lambdas, self.deviations[t]):
                w.writerow([_f(t), _f(lam), "" if d is None else repr(d)])
        return buf.getvalue()


def central_path_log_images(n: int, t, lambdas: Sequence, precision_bits: int = ipm.DEFAULT_PRECISION):
    """(barrier, list of center results) for eta = t^lambda on CEX_n(t)."""
    bits = ipm.working_precision(n, t, precision_bits)
    bar = ipm.LogBarrier.from_monomial_lp(build_cex(n), t, bits)
    ctx = bar.ctx
    tt = ipm._to_mpf(ctx, t)
    etas = [ctx.power(tt, ipm._to_mpf(ctx, Fraction(l))) for l in lambdas]
    c = [0] * (n - 1) + [1]
    return bar, ipm.center_sweep(bar, c, etas, ipm.lifted_start(bar, t), tol=ipm.tight_tolerance(bar))


def run_convergence(n: int, t_list: Sequence, lambdas: Sequence, precision_bits: int = ipm.DEFAULT_PRECISION,
                    with_delta: bool = False) -> ConvergenceReport:
    lambdas = sorted(Fraction(l) for l in lambdas)
    devs, failures, delta = {}, [], {}
    for t in t_list:
        try:
            bar, rs = central_path_log_images(n, t, lambdas, precision_bits)
            devs[t] = [_deviation(bar, r.x, t, cex_tropical_path_point(n, l)) for l, r in zip(lambdas, rs)]
        except (ipm.MaxNewtonItersError, ipm.PrecisionLossError, ipm.NotFeasibleError) as exc:
            devs[t] = [None] * len(lambdas)
            failures.append({"t": _f(t), "error": f"{type(exc).__name__}: {exc}"})
        if with_delta:
            delta[t] = vertex_log_deviation(n, t, precision_bits)
    return ConvergenceReport(n, list(t_list), lambdas, devs, failures, delta)


def numeric_vertices(bar: ipm.LogBarrier) -> list:
    """Vertices of {A x <= b} by basis enumeration at working precision."""
    ctx = bar.ctx
    n, m = bar.n, bar.m
    eps = ctx.mpf(2) ** (-(bar.precision_bits // 2))
    out = []
    for basis in itertools.combinations(range(m), n):
        M = ctx.matrix([bar.A[i] for i in basis])
        try:
            x = ctx.lu_solve(M, ctx.matrix([bar.b[i] for i in basis]))
        except ZeroDivisionError:
            continue
        x = [x[j] for j in range(n)]
        scale = [abs(bi) + ctx.fsum(abs(a * v) for a, v in zip(row, x)) for row, bi in zip(bar.A, bar.b)]
        if all(s >= -eps * sc for s, sc in zip(bar.slacks(x), scale)):
            x = [ctx.mpf(0) if abs(v) < eps else v for v in x]
            if not any(all(abs(a - b) <= eps * (1 + abs(a)) for a, b in zip(x, y)) for y in out):
                out.append(x)
    return out


def vertex_log_deviation(n: int, t, precision_bits: int = ipm.DEFAULT_PRECISION) -> float:
    """max over vertices v of d_inf(log_t v, tcex_n)."""
    bits = ipm.working_precision(n, t, precision_bits)
    bar = ipm.LogBarrier.from_monomial_lp(build_cex(n), t, bits)
    P = build_tcex(n)
    ctx = bar.ctx
    lt = ctx.log(ipm._to_mpf(ctx, t))
    worst = 0.0
    for v in numeric_vertices(bar):
        y = tuple(NEG_INF if x == 0 else Fraction(float(ctx.log(x) / lt)) for x in v)
        d = distance_to(P, y, Fraction(1, 2**24))
        worst = max(worst, math.inf if d is None else float(d))
    return worst


# -------------------------------------------------------- iteration counts


@dataclass
class IterationReport:
    n: int
    t: Fraction
    sigma: Fraction
    precision_bits: int
    start_value: float
    target_exp: Fraction
    iterations: int
    gamma_reference: int
    certified: bool
    audit_M: float
    audit_band: tuple
    audited_points: int
    tube_radius: Fraction
    tube_max_distance: float
    tube_contains: bool

    @property
    def verdict(self) -> bool:
        return self.iterations >= self.gamma_reference

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "t": _f(self.t),
            "sigma": _f(self.sigma),
            "precision_bits": self.precision_bits,
            "start_value": self.start_value,
            "target_exp": _f(self.target_exp),
            "iterations": self.iterations,
            "gamma_reference": self.gamma_reference,
            "certified": self.certified,
            "verdict": self.verdict if self.certified else None,
            "audit": {"M": self.audit_M, "band": list(self.audit_band), "points": self.audited_points},
            "tube": {
                "radius": _f(self.tube_radius),
                "max_distance": self.tube_max_distance,
                "contains": self.tube_contains,
                "note": "diagnostic only; the radius is a user parameter",
            },
        }


def run_ipm(n: int, t, sigma=Fraction(1, 2), precision_bits: int = ipm.DEFAULT_PRECISION, target_exp=None,
            tube_radius=Fraction(1, 2), audit_samples: int = 3, raise_precision: bool = True):
    """Predictor-corrector on CEX_n(t) from the lifted start down to t^target_exp.

    With ``raise_precision`` off, ``precision_bits`` is used as given.
    Returns (IterationReport, Trajectory, AuditReport).
    """
    t = Fraction(t)
    sigma = Fraction(sigma)
    target_exp = -2 * u(n) if target_exp is None else Fraction(target_exp)
    bits = ipm.working_precision(n, t, precision_bits) if raise_precision else precision_bits
    bar = ipm.LogBarrier.from_monomial_lp(build_cex(n), t, bits)
    ctx = bar.ctx
    config = ipm.IPMConfig(precision_bits=bits, sigma=sigma)
    c = [0] * (n - 1) + [1]
    tt = ipm._to_mpf(ctx, t)
    x0 = ipm.lifted_start(bar, t)
    if not bar.is_interior(x0):
        x0 = ipm.phase_one(bar, x0, config)
    target = ctx.power(tt, ipm._to_mpf(ctx, target_exp))
    traj = ipm.predictor_corrector(bar, c, x0, target, config)
    audit = ipm.audit_trajectory(bar, c, traj, sigma, audit_samples)
    v_start = traj.iterates[0].obj
    lam_lo = Fraction(float(-ctx.log(v_start) / ctx.log(tt)))
    lam_hi = -target_exp
    gamma_ref = cex_gamma(n, lam_lo, lam_hi)
    path = cex_path_breakpoints(n, min(Fraction(0), lam_lo), lam_hi)
    curve = [tuple(Fraction(float(v)) for v in log_image(bar, it.x, t)) for it in traj.iterates]
    dists = [distance_to_path(path, p) for p in curve]
    tube = Tube(path, Fraction(tube_radius))
    dmax = max(float(d) for d in dists)
    report = IterationReport(
        n, t, sigma, bits, float(v_start), target_exp, traj.predictor_steps, gamma_ref, audit.certified,
        audit.M, audit.band, len(audit.points), tube.radius, dmax, dmax <= tube.radius,
    )
    return report, traj, audit


# ----------------------------------------------------------------- faces


REFERENCE_VERTEX = (0.451, 0.451, 0.098)


def run_faces(n: int, s) -> dict:
    p = cex_polytope(n, Fraction(s))
    rep = enumerate_vertices(p)
    pairing = check_facet_pairing(p)
    out = {
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "s": _f(p.s),
        "t": _f(p.t),
        **rep.to_json(),
        "vertex_count": len(rep.vertices),
        "simplex_chain_disjoint": check_disjoint_faces(p),
        "pairing": [
            {"i": fp.i, "chain_row": fp.chain_row, "coupling_row": fp.coupling_row, "disjoint": fp.disjoint}
            for fp in pairing
        ],
    }
    if n == 3:
        best = min(rep.vertices, key=lambda v: max(abs(float(a) - b) for a, b in zip(v, REFERENCE_VERTEX)))
        out["reference_vertex"] = {
            "vertex": [float(v) for v in best],
            "max_abs_error": max(abs(float(a) - b) for a, b in zip(best, REFERENCE_VERTEX)),
            "tight_rows": [p.labels[i] for i in sorted(rep.facet_incidence[rep.vertices.index(best)])],
        }
    return out


# ---------------------------------------------------------- barrier suites


def random_interior_points(p, count: int, rng: random.Random, vertices=None) -> list:
    """Exact strictly interior points: random positive convex weights on the vertices.

    Weights are raised to random powers so some samples drift toward the boundary.
    """
    verts = vertices if vertices is not None else enumerate_vertices(p).vertices
    out = []
    for _ in range(count):
        k = rng.choice((1, 1, 2, 4))
        w = [Fraction(rng.randint(1, 1000)) ** k for _ in verts]
        total = sum(w)
        x = tuple(sum(wi * v[j] for wi, v in zip(w, verts)) / total for j in range(p.n))
        out.append(x)
    return out


@dataclass
class BarrierSuiteReport:
    lower_checks: int
    lower_failures: int
    min_lower_slack: float
    log_checks: int
    log_failures: int
    upper_applicable: int
    upper_failures: int
    upper_unmet: int

    @property
    def ok(self) -> bool:
        return self.lower_failures == 0 and self.log_failures == 0 and self.upper_failures == 0


def run_barrier_suite(n: int = 3, s=10, points: int = 100, pairs: int = 50, seed: int = 0,
                      precision_bits: int = ipm.DEFAULT_PRECISION, rel_tol=Fraction(1, 2**64)) -> BarrierSuiteReport:
    rng = random.Random(seed)
    p = cex_polytope(n, s)
    verts = enumerate_vertices(p).vertices
    bar = ipm.LogBarrier.from_polytope(p, precision_bits)
    pts = random_interior_points(p, points, rng, verts)
    lower_fail, upper_app, upper_fail, upper_unmet = 0, 0, 0, 0
    min_slack = math.inf
    for x in pts:
        sl = ipm.hessian_lower_bound_slack(bar, x)
        min_slack = min(min_slack, float(sl))
        if not ipm.hessian_lower_bound_check(bar, x, rel_tol):
            lower_fail += 1
        r = ipm.hessian_upper_bound_check(bar, x, rel_tol)
        if r is ipm.PRECONDITION_UNMET:
            upper_unmet += 1
        else:
            upper_app += 1
            upper_fail += 0 if r else 1
    # deep-interior points where the upper-bound precondition can hold
    for x in _deep_points(bar, n, p.t):
        r = ipm.hessian_upper_bound_check(bar, x, rel_tol)
        if r is ipm.PRECONDITION_UNMET:
            upper_unmet += 1
        else:
            upper_app += 1
            upper_fail += 0 if r else 1
    log_fail = 0
    pair_pts = random_interior_points(p, 2 * pairs, rng, verts)
    for x, y in zip(pair_pts[::2], pair_pts[1::2]):
        if not ipm.log_bound_check(bar, x, y, rel_tol):
            log_fail += 1
    return BarrierSuiteReport(points, lower_fail, min_slack, pairs, log_fail, upper_app, upper_fail, upper_unmet)


def _deep_points(bar, n, t) -> list:
    """Points with every coordinate tiny relative to its room to grow."""
    out = []
    for k in range(1, 6):
        x = ipm.lifted_start(bar, t, Fraction(k, 2))
        if bar.is_interior(x):
            out.append(x)
    return out


# ------------------------------------------------------- neighborhood chain


@dataclass
class NeighborhoodReport:
    eta_exponents: list
    step_samples: int
    step_violations: int
    nm_samples: int
    band_violations: int
    band: tuple

    @property
    def ok(self) -> bool:
        return self.step_violations == 0 and self.band_violations == 0


def _random_direction(bar, rng, x):
    ctx = bar.ctx
    d = [ctx.mpf(rng.gauss(0, 1)) for _ in range(bar.n)]
    return [di / bar.local_norm(x, d) for di in d]


def run_neighborhood_chain(n: int = 2, t=100, eta_exponents=(0, 1, 5), samples: int = 50, seed: int = 0,
                           M=Fraction(3, 16), precision_bits: int = ipm.DEFAULT_PRECISION) -> NeighborhoodReport:
    """Sample N^step_{1/4}(eta) and N_M(eta) around accurate centers; count chain violations."""
    rng = random.Random(seed)
    bits = ipm.working_precision(n, t, precision_bits)
    bar = ipm.LogBarrier.from_monomial_lp(build_cex(n), t, bits)
    ctx = bar.ctx
    c = [0] * (n - 1) + [1]
    tt = ipm._to_mpf(ctx, t)
    etas = [ctx.power(tt, e) for e in eta_exponents]
    centers = ipm.center_sweep(bar, c, etas, ipm.lifted_start(bar, t), tol=ipm.tight_tolerance(bar))
    lo, hi = ipm.phi_band(M, n)
    lo, hi = ipm._to_mpf(ctx, lo), ipm._to_mpf(ctx, hi)
    rho = Fraction(1, 4)
    step_n = step_v = nm_n = band_v = 0
    for eta, cr in zip(etas, centers):
        C = cr.x
        got_step = got_nm = 0
        tries = 0
        while (got_step < samples or got_nm < samples) and tries < 200 * samples:
            tries += 1
            d = _random_direction(bar, rng, C)
            r = ctx.mpf(rng.uniform(0, 0.95))
            x = [ci + r * di for ci, di in zip(C, d)]
            if not bar.is_interior(x):
                continue
            if got_step < samples and ipm.in_step_neighborhood(bar, c, x, eta, rho):
                got_step += 1
                if not ipm.in_N_M(bar, c, x, eta, Fraction(3, 16), C):
                    step_v += 1
            if got_nm < samples and ipm.in_N_M(bar, c, x, eta, M, C):
                got_nm += 1
                if not ipm.in_mult_neighborhood(x, C, lo, hi):
                    band_v += 1
        step_n += got_step
        nm_n += got_nm
    return NeighborhoodReport(list(eta_exponents), step_n, step_v, nm_n, band_v, (float(lo), float(hi)))


def run_duality_gap(n: int = 2, t=100, eta_values=(1, 10, 100, 1000), precision_bits: int = ipm.DEFAULT_PRECISION):
    bits = ipm.working_precision(n, t, precision_bits)
    bar = ipm.LogBarrier.from_monomial_lp(build_cex(n), t, bits)
    c = [0] * (n - 1) + [1]
    rs = ipm.center_sweep(bar, c, list(eta_values), ipm.lifted_start(bar, t), tol=ipm.tight_tolerance(bar))
    return ipm.duality_gap_check(bar, c, [(r.eta, r.x) for r in rs])
