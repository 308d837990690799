"""Log-barrier machinery in arbitrary-precision floating point.

Each :class:`LogBarrier` owns a private mpmath context, so distinct solver
instances can run in parallel at different precisions.  Linear solves use a
Jacobi-scaled LU factorization and report :class:`PrecisionLossError` when the
residual is not small relative to the working precision.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from mpmath.ctx_mp import MPContext

DEFAULT_PRECISION = 256
CORRECTOR_TOL = Fraction(1, 13)


class NotFeasibleError(ValueError):
    """Point outside the open barrier domain."""


class MaxNewtonItersError(RuntimeError):
    pass


class PrecisionLossError(ArithmeticError):
    pass


class StallDetectedError(RuntimeError):
    """Predictor step length underflowed at the working precision."""


class _PreconditionUnmet:
    def __repr__(self):
        return "PRECONDITION_UNMET"

    def __bool__(self):
        return False


PRECONDITION_UNMET = _PreconditionUnmet()


def working_precision(n: int, t, base: int = DEFAULT_PRECISION) -> int:
    """Bits needed so that 2^(bits/4) >= t^(2 u_n); at least ``base``, a multiple of 64."""
    from .cex import u

    need = 4 * 2 * float(u(n)) * math.log2(float(t))
    bits = base
    while bits < need:
        bits += 64
    return bits


def _to_mpf(ctx, q):
    if isinstance(q, Fraction):
        return ctx.mpf(q.numerator) / q.denominator
    return ctx.mpf(q)


@dataclass(frozen=True)
class IPMConfig:
    precision_bits: int = DEFAULT_PRECISION
    newton_tol: Fraction = Fraction(1, 16)
    sigma: Fraction = Fraction(1, 2)
    rho: Fraction = Fraction(1, 4)
    M: float | None = None
    band: tuple | None = None
    max_newton_iters: int = 2000
    max_predictor_steps: int = 100000

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if self.rho > Fraction(1, 4):
            raise ValueError("rho must not exceed 1/4")
        if self.band is not None and not 0 < self.band[0] < 1 < self.band[1]:
            raise ValueError("band must satisfy 0 < lower < 1 < upper")


def predictor_corrector_level(theta: int, sigma) -> float:
    """theta * log(1 / (1 - sigma)) + 1/154."""
    return theta * math.log(1 / (1 - float(sigma))) + 1 / 154


class LogBarrier:
    """f(x) = -sum log(b - A x) for the polytope {A x <= b}."""

    def __init__(self, A: Sequence[Sequence], b: Sequence, precision_bits: int = DEFAULT_PRECISION):
        self.ctx = MPContext()
        self.ctx.prec = precision_bits
        self.precision_bits = precision_bits
        self.A = [[_to_mpf(self.ctx, a) for a in row] for row in A]
        self.b = [_to_mpf(self.ctx, v) for v in b]
        self.m = len(self.A)
        self.n = len(self.A[0])

    @classmethod
    def from_polytope(cls, p, precision_bits: int = DEFAULT_PRECISION) -> "LogBarrier":
        return cls(p.A, p.b, precision_bits)

    @classmethod
    def from_monomial_lp(cls, lp, t, precision_bits: int = DEFAULT_PRECISION) -> "LogBarrier":
        """Evaluate every q t^e entry at a real t > 1 in the working precision."""
        bar = cls([[0] * lp.n], [0], precision_bits)
        ctx = bar.ctx
        tt = _to_mpf(ctx, t)
        if tt <= 1:
            raise ValueError("t must exceed 1")

        def cell(v):
            terms = (v,) if hasattr(v, "coeff") else tuple(v)
            return ctx.fsum(_to_mpf(ctx, m.coeff) * ctx.power(tt, _to_mpf(ctx, m.exponent)) for m in terms)

        bar.A = [[cell(v) for v in row.coeffs] for row in lp.rows]
        bar.b = [cell(row.rhs) for row in lp.rows]
        bar.m, bar.n = len(bar.A), lp.n
        return bar

    @property
    def theta(self) -> int:
        return self.m

    @property
    def K(self) -> int:
        return 4 * self.theta + 1

    def vector(self, values) -> list:
        return [_to_mpf(self.ctx, v) for v in values]

    def Av(self, v) -> list:
        return [self.ctx.fsum(a * x for a, x in zip(row, v)) for row in self.A]

    def slacks(self, x) -> list:
        return [bi - ax for bi, ax in zip(self.b, self.Av(x))]

    def is_interior(self, x) -> bool:
        return all(s > 0 for s in self.slacks(x))

    def _require(self, x) -> list:
        s = self.slacks(x)
        if not all(v > 0 for v in s):
            raise NotFeasibleError("point is not strictly feasible")
        return s

    def value(self, x):
        s = self._require(x)
        return -self.ctx.fsum(self.ctx.log(v) for v in s)

    def gradient(self, x) -> list:
        s = self._require(x)
        inv = [1 / v for v in s]
        return [self.ctx.fsum(self.A[i][j] * inv[i] for i in range(self.m)) for j in range(self.n)]

    def hessian(self, x):
        s = self._require(x)
        inv2 = [1 / (v * v) for v in s]
        H = self.ctx.matrix(self.n, self.n)
        for j in range(self.n):
            for k in range(j, self.n):
                h = self.ctx.fsum(self.A[i][j] * self.A[i][k] * inv2[i] for i in range(self.m))
                H[j, k] = h
                H[k, j] = h
        return H

    def local_norm(self, x, v):
        """||v||_x = sqrt(v^T H(x) v), evaluated through the slacks."""
        s = self._require(x)
        av = self.Av(v)
        return self.ctx.sqrt(self.ctx.fsum((a / si) ** 2 for a, si in zip(av, s)))

    def solve(self, H, r) -> list:
        """Solve H d = r with symmetric Jacobi scaling and a residual check."""
        ctx = self.ctx
        n = self.n
        D = [1 / ctx.sqrt(H[j, j]) for j in range(n)]
        Hs = ctx.matrix(n, n)
        for j in range(n):
            for k in range(n):
                Hs[j, k] = D[j] * H[j, k] * D[k]
        rs = ctx.matrix([D[j] * r[j] for j in range(n)])
        y = ctx.lu_solve(Hs, rs)
        res = Hs * y - rs
        scale = ctx.norm(rs) + ctx.mnorm(Hs, 1) * ctx.norm(y)
        if scale > 0 and ctx.norm(res) > scale * ctx.mpf(2) ** (-(self.precision_bits // 3)):
            raise PrecisionLossError("linear solve residual too large for the working precision")
        return [D[j] * y[j] for j in range(n)]


def _dot(ctx, u, v):
    return ctx.fsum(a * b for a, b in zip(u, v))


# ------------------------------------------------------------------ centering


@dataclass
class CenterResult:
    x: list
    decrement: object
    iterations: int
    eta: object = None


def newton_direction(bar: LogBarrier, c, eta, x) -> list:
    """n_eta(x) = -H(x)^{-1} (eta c + g(x))."""
    g = bar.gradient(x)
    d = bar.solve(bar.hessian(x), [eta * ci + gi for ci, gi in zip(c, g)])
    return [-v for v in d]


def _damped_step(bar: LogBarrier, x, d, dec):
    step = 1 if dec <= 0.25 else 1 / (1 + dec)
    for _ in range(60):
        y = [xi + step * di for xi, di in zip(x, d)]
        if bar.is_interior(y):
            return y
        step /= 2
    raise PrecisionLossError("no interior point along the Newton direction")


def newton_center(bar: LogBarrier, c, eta, x0, config: IPMConfig = IPMConfig(), tol=None) -> CenterResult:
    """Damped Newton on eta <c, x> + f(x) until the local-norm decrement is at most ``tol``."""
    ctx = bar.ctx
    c = bar.vector(c)
    eta = _to_mpf(ctx, eta)
    x = bar.vector(x0)
    if not bar.is_interior(x):
        raise NotFeasibleError("starting point is not strictly feasible")
    tol = _to_mpf(ctx, config.newton_tol if tol is None else tol)
    for k in range(config.max_newton_iters):
        d = newton_direction(bar, c, eta, x)
        dec = bar.local_norm(x, d)
        if dec <= tol:
            return CenterResult(x, dec, k, eta)
        x = _damped_step(bar, x, d, dec)
    raise MaxNewtonItersError(f"decrement still above {tol} after {config.max_newton_iters} steps")


def center_sweep(bar: LogBarrier, c, etas, x0, config: IPMConfig = IPMConfig(), tol=None) -> list:
    """Centers for increasing ``etas``, each warm-started from the previous one.

    Jumps larger than a factor 2 in eta are bridged by intermediate centers.
    """
    ctx = bar.ctx
    x = bar.vector(x0)
    prev = None
    out = []
    for eta in etas:
        eta = _to_mpf(ctx, eta)
        if prev is not None:
            mid = prev * 2
            while mid < eta:
                x = newton_center(bar, c, mid, x, config).x
                mid *= 2
        r = newton_center(bar, c, eta, x, config, tol)
        x = r.x
        out.append(r)
        prev = eta
    return out


def projected_newton(bar: LogBarrier, c, x, tol, max_iters: int = 2000):
    """Newton step of f restricted to L(x) = {y : <c, y> = <c, x>} and the implied eta.

    Returns (direction, local norm, eta) where eta = -<c, H^-1 g> / <c, H^-1 c>.
    """
    ctx = bar.ctx
    H = bar.hessian(x)
    g = bar.gradient(x)
    wg = bar.solve(H, g)
    wc = bar.solve(H, c)
    alpha = _dot(ctx, c, wg) / _dot(ctx, c, wc)
    d = [-(a - alpha * b) for a, b in zip(wg, wc)]
    return d, bar.local_norm(x, d), -alpha


def recenter_in_level(bar: LogBarrier, c, x0, tol, max_iters: int = 2000) -> CenterResult:
    """Damped projected Newton inside L(x0) until the projected decrement is at most ``tol``."""
    c = bar.vector(c)
    x = bar.vector(x0)
    tol = _to_mpf(bar.ctx, tol)
    for k in range(max_iters):
        d, dec, eta = projected_newton(bar, c, x, tol)
        if dec <= tol:
            return CenterResult(x, dec, k, eta)
        x = _damped_step(bar, x, d, dec)
    raise MaxNewtonItersError(f"projected decrement still above {tol} after {max_iters} steps")


def tight_tolerance(bar: LogBarrier):
    return bar.ctx.mpf(2) ** (-(bar.precision_bits // 4))


# ------------------------------------------------------- predictor-corrector


@dataclass
class Iterate:
    kind: str
    x: list
    eta: object
    obj: object
    decrement: object = None


@dataclass
class Trajectory:
    iterates: list = field(default_factory=list)
    precision_bits: int = DEFAULT_PRECISION

    @property
    def predictor_steps(self) -> int:
        return sum(1 for it in self.iterates if it.kind == "predictor")

    def points(self) -> list:
        return [it.x for it in self.iterates]

    def to_csv(self) -> str:
        digits = int(self.precision_bits * math.log10(2)) + 1
        from mpmath import nstr

        def fmt(v):
            return "" if v is None else nstr(v, digits)

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = len(self.iterates[0].x) if self.iterates else 0
        w.writerow(["iter", "kind", "eta", "obj"] + [f"x{i + 1}" for i in range(n)])
        for k, it in enumerate(self.iterates):
            w.writerow([k, it.kind, fmt(it.eta), fmt(it.obj)] + [fmt(v) for v in it.x])
        return buf.getvalue()


def predictor_corrector(bar: LogBarrier, c, x0, value_target, config: IPMConfig = IPMConfig(),
                        eta_start=None) -> Trajectory:
    """Affine-scaling predictor plus projected-Newton corrector until <c, x> <= value_target.

    The start is first recentred inside its own level set (or, when
    ``eta_start`` is given, moved to the center for that eta).
    """
    ctx = bar.ctx
    c = bar.vector(c)
    target = _to_mpf(ctx, value_target)
    corr_tol = _to_mpf(ctx, CORRECTOR_TOL)
    sigma = _to_mpf(ctx, config.sigma)
    x = bar.vector(x0)
    if not bar.is_interior(x):
        raise NotFeasibleError("starting point is not strictly feasible")
    traj = Trajectory(precision_bits=bar.precision_bits)
    if eta_start is not None:
        x = newton_center(bar, c, eta_start, x, config).x
    r = recenter_in_level(bar, c, x, corr_tol, config.max_newton_iters)
    x = r.x
    traj.iterates.append(Iterate("start", x, r.eta, _dot(ctx, c, x), r.decrement))
    while _dot(ctx, c, x) > target:
        if traj.predictor_steps >= config.max_predictor_steps:
            raise MaxNewtonItersError("predictor step budget exhausted")
        wc = bar.solve(bar.hessian(x), c)
        awc = bar.Av(wc)
        s = bar.slacks(x)
        # slack_i(x - s c_x) = slack_i + s (A c_x)_i; only rows with (A c_x)_i < 0 shrink
        ratios = [si / (-a) for si, a in zip(s, awc) if a < 0]
        if not ratios:
            raise StallDetectedError("objective unbounded along the predictor direction")
        sbar = min(ratios)
        xp = [xi - sigma * sbar * w for xi, w in zip(x, wc)]
        if sbar <= 0 or xp == x or not bar.is_interior(xp):
            raise StallDetectedError("predictor step underflowed")
        _, dec, eta = projected_newton(bar, c, xp, corr_tol)
        traj.iterates.append(Iterate("predictor", xp, eta, _dot(ctx, c, xp), dec))
        x = xp
        if _dot(ctx, c, x) <= target:
            break
        r = recenter_in_level(bar, c, x, corr_tol, config.max_newton_iters)
        x = r.x
        traj.iterates.append(Iterate("corrector", x, r.eta, _dot(ctx, c, x), r.decrement))
    return traj


# ------------------------------------------------------------ neighborhoods


def barrier_objective(bar: LogBarrier, c, eta, x):
    return eta * _dot(bar.ctx, bar.vector(c), x) + bar.value(x)


def in_step_neighborhood(bar: LogBarrier, c, x, eta, rho) -> bool:
    x = bar.vector(x)
    bar._require(x)
    d = newton_direction(bar, bar.vector(c), _to_mpf(bar.ctx, eta), x)
    return bar.local_norm(x, d) <= _to_mpf(bar.ctx, rho)


def in_N_M(bar: LogBarrier, c, x, eta, M, center) -> bool:
    """f_eta(x) - f_eta(C(eta)) <= M, with ``center`` an accurate C(eta)."""
    x = bar.vector(x)
    bar._require(x)
    eta = _to_mpf(bar.ctx, eta)
    gap = barrier_objective(bar, c, eta, x) - barrier_objective(bar, c, eta, center)
    return gap <= _to_mpf(bar.ctx, M)


def in_mult_neighborhood(x, center, lower, upper) -> bool:
    return all(lower * ci <= xi <= upper * ci for xi, ci in zip(x, center))


def phi(z):
    from mpmath import log

    return z - log(z) - 1


def phi_band(M, n: int, bits: int = 60) -> tuple:
    """Roots (lower < 1 < upper) of z - log z - 1 = n M, by bisection to ``bits`` bits."""
    ctx = MPContext()
    ctx.prec = bits + 40
    level = ctx.mpf(n) * _to_mpf(ctx, M)
    if level <= 0:
        raise ValueError("M must be positive")

    def f(z):
        return z - ctx.log(z) - 1 - level

    def bisect(lo, hi, rising):
        for _ in range(bits + 20):
            mid = (lo + hi) / 2
            if (f(mid) > 0) == rising:
                hi = mid
            else:
                lo = mid
        return (lo + hi) / 2

    lo = ctx.exp(-level - 1)  # f(lo) >= 0
    hi = level + 2 + ctx.log(level + 2)
    while f(hi) <= 0:
        hi *= 2
    return bisect(lo, ctx.mpf(1), False), bisect(ctx.mpf(1), hi, True)


# ----------------------------------------------------- barrier inequalities


def _relative_tol(bar: LogBarrier, rel_tol=None):
    return bar.ctx.mpf(2) ** (-(bar.precision_bits // 2)) if rel_tol is None else _to_mpf(bar.ctx, rel_tol)


def scaled_hessian(bar: LogBarrier, x):
    """Diag(x) H(x) Diag(x); the Hessian bounds become bounds on its spectrum."""
    H = bar.hessian(x)
    S = bar.ctx.matrix(bar.n, bar.n)
    for j in range(bar.n):
        for k in range(bar.n):
            S[j, k] = x[j] * H[j, k] * x[k]
    return S


def hessian_lower_bound_slack(bar: LogBarrier, x):
    """(lambda_min(X H X) - 1/n) / ||X H X||_2, which is >= 0 when H >= Diag(1/x^2)/n."""
    x = bar.vector(x)
    bar._require(x)
    ev = bar.ctx.eigsy(scaled_hessian(bar, x), eigvals_only=True)
    ev = [ev[i] for i in range(bar.n)]
    return (min(ev) - bar.ctx.mpf(1) / bar.n) / max(abs(v) for v in ev)


def hessian_lower_bound_check(bar: LogBarrier, x, rel_tol=None) -> bool:
    return hessian_lower_bound_slack(bar, x) >= -_relative_tol(bar, rel_tol)


def hessian_upper_precondition(bar: LogBarrier, x) -> bool:
    x = bar.vector(x)
    K = bar.K
    for i in range(bar.n):
        up = list(x)
        up[i] = x[i] + (K + 1) * x[i]
        down = list(x)
        down[i] = x[i] / 2
        if not (bar.is_interior(up) and bar.is_interior(down)):
            return False
    return True


def hessian_upper_bound_check(bar: LogBarrier, x, rel_tol=None):
    """True/False for H <= 4 n K^2 Diag(1/x^2), or PRECONDITION_UNMET."""
    x = bar.vector(x)
    bar._require(x)
    if not hessian_upper_precondition(bar, x):
        return PRECONDITION_UNMET
    ev = bar.ctx.eigsy(scaled_hessian(bar, x), eigvals_only=True)
    bound = 4 * bar.n * bar.K ** 2
    return max(ev[i] for i in range(bar.n)) <= bound * (1 + _relative_tol(bar, rel_tol))


def log_bound_check(bar: LogBarrier, x, y, rel_tol=None) -> bool:
    """f(y) - f(x) >= <g(x) + 1/(n x), y - x> + (1/n) sum(log x_i - log y_i)."""
    ctx = bar.ctx
    x, y = bar.vector(x), bar.vector(y)
    fx, fy = bar.value(x), bar.value(y)
    g = bar.gradient(x)
    n = bar.n
    terms = [(gi + 1 / (n * xi)) * (yi - xi) for gi, xi, yi in zip(g, x, y)]
    terms += [(ctx.log(xi) - ctx.log(yi)) / n for xi, yi in zip(x, y)]
    rhs = ctx.fsum(terms)
    scale = abs(fx) + abs(fy) + ctx.fsum(abs(v) for v in terms) + 1
    return fy - fx - rhs >= -_relative_tol(bar, rel_tol) * scale


@dataclass
class DualityGapReport:
    ok: bool
    theta: int
    max_product: float
    lower_band: float | None
    products: list


def duality_gap_check(bar: LogBarrier, c, centered: Sequence, tol=Fraction(1, 1000)) -> DualityGapReport:
    """eta <c, x> <= theta (1 + tol) on every centered (eta, x); lower band over eta >= 1."""
    ctx = bar.ctx
    c = bar.vector(c)
    prods = []
    for eta, x in centered:
        eta = _to_mpf(ctx, eta)
        prods.append((eta, eta * _dot(ctx, c, bar.vector(x))))
    limit = bar.theta * (1 + _to_mpf(ctx, tol))
    ok = all(p <= limit for _, p in prods)
    band = [p for e, p in prods if e >= 1]
    return DualityGapReport(
        ok,
        bar.theta,
        float(max((p for _, p in prods), default=0)),
        float(min(band)) if band else None,
        [(float(e), float(p)) for e, p in prods],
    )


def centered_points(traj: Trajectory) -> list:
    return [(it.eta, it.x) for it in traj.iterates if it.kind in ("start", "corrector")]


# -------------------------------------------------------------------- audit


@dataclass
class AuditPoint:
    obj: float
    eta: float
    gap: float
    in_N: bool
    ratio_min: float
    ratio_max: float
    in_band: bool


@dataclass
class AuditReport:
    M: float
    band: tuple
    points: list

    @property
    def certified(self) -> bool:
        return bool(self.points) and all(p.in_band for p in self.points)

    @property
    def all_in_N(self) -> bool:
        return all(p.in_N for p in self.points)


def audit_trajectory(bar: LogBarrier, c, traj: Trajectory, sigma, samples: int = 3) -> AuditReport:
    """Check every iterate and ``samples`` interior points of each segment against
    the level-M^pc neighborhood and its multiplicative band."""
    ctx = bar.ctx
    c = bar.vector(c)
    M = predictor_corrector_level(bar.theta, sigma)
    lo, hi = phi_band(M, bar.n)
    lo, hi = _to_mpf(ctx, lo), _to_mpf(ctx, hi)
    tol = tight_tolerance(bar)
    pts = traj.points()
    zs = []
    for a, b in zip(pts, pts[1:]):
        for k in range(samples + 1):
            th = ctx.mpf(k) / (samples + 1)
            zs.append([ai + th * (bi - ai) for ai, bi in zip(a, b)])
    if pts:
        zs.append(pts[-1])
    out = []
    for z in zs:
        r = recenter_in_level(bar, c, z, tol)
        y = r.x
        gap = bar.value(z) - bar.value(y)
        ratios = [zi / yi for zi, yi in zip(z, y)]
        out.append(AuditPoint(
            float(_dot(ctx, c, z)), float(r.eta), float(gap), gap <= M,
            float(min(ratios)), float(max(ratios)), in_mult_neighborhood(z, y, lo, hi),
        ))
    return AuditReport(M, (float(lo), float(hi)), out)


# ---------------------------------------------------------------- start point


def lifted_start(bar: LogBarrier, t, eps=Fraction(1, 8)) -> list:
    """x_i = t^(-eps 2^(n-i)), the lift of 0 pushed into the tropical interior."""
    ctx = bar.ctx
    t = _to_mpf(ctx, t)
    n = bar.n
    return [ctx.power(t, -_to_mpf(ctx, eps) * 2 ** (n - 1 - j)) for j in range(n)]


def phase_one(bar: LogBarrier, x0, config: IPMConfig = IPMConfig()) -> list:
    """Strictly feasible point from an arbitrary x0 via the shifted system A x - tau <= b."""
    ctx = bar.ctx
    x0 = bar.vector(x0)
    s = bar.slacks(x0)
    if all(v > 0 for v in s):
        return x0
    tau0 = max(-v for v in s) + 1
    aug = LogBarrier.__new__(LogBarrier)
    aug.ctx, aug.precision_bits = ctx, bar.precision_bits
    aug.A = [row + [ctx.mpf(-1)] for row in bar.A]
    aug.b = list(bar.b)
    aug.m, aug.n = bar.m, bar.n + 1
    cost = [ctx.mpf(0)] * bar.n + [ctx.mpf(1)]
    y = x0 + [tau0]
    eta = ctx.mpf(1)
    for _ in range(400):
        y = newton_center(aug, cost, eta, y, config).x
        if y[-1] < 0 and bar.is_interior(y[:-1]):
            return y[:-1]
        eta *= 2
    raise NotFeasibleError("phase one found no strictly feasible point")
