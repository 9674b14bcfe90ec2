"""Constrained geodesically convex minimisation on Hadamard manifolds.

All solvers take a :class:`GConvexProblem` whose feasible set is a geodesic
ball. Oracle calls are tallied in an :class:`OracleCounter` that nested solvers
share, so a trace always reports cumulative work.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, UnsupportedStructureError
from .geometry import GeodesicBall, project_ball
from .manifolds import Euclidean
from .problem import GConvexProblem
from .trace import OracleCounter, RunTrace

MAX_STEPS = 10_000_000


# -- certificates -----------------------------------------------------------


def gap_certificate(problem, x, g, mu=None):
    """Upper bound on f(x) - min f over the ball, from one gradient.

    Strong convexity gives f* >= f(x) + min_z <g, log_x z> + mu/2 d(x,z)^2. On a
    Hadamard manifold log_x is nonexpansive, so log_x maps the ball B(c, r)
    into the tangent ball B(log_x c, r); minimising the quadratic model over
    that tangent ball is a Euclidean projection.
    """
    return ball_gap_certificate(problem.feasible, x, g, problem.mu if mu is None else mu)


def ball_gap_certificate(ball, x, g, mu):
    """gap_certificate for a bare ball and strong convexity constant."""
    M = ball.manifold
    w = M.log(x, ball.center)
    r = ball.radius
    gg = M.inner(x, g, g)
    if gg == 0.0:
        return 0.0
    if mu > 0:
        t = -g / mu
        diff = t - w
        nd = M.norm(x, diff)
        u = t if nd <= r else w + (r / nd) * diff
        val = M.inner(x, g, u) + 0.5 * mu * M.inner(x, u, u)
    else:
        val = M.inner(x, g, w) - r * math.sqrt(gg)
    return max(-val, 0.0)


def _radius(problem, x0, g0):
    if problem.lip is not None:
        return problem.lip / problem.L
    # |grad f(x)| <= |grad f(x0)| + L d(x, x0) on the ball
    return problem.manifold.norm(x0, g0) / problem.L + problem.feasible.diameter


def prgd_iteration_bound(mu, L, zeta_R, eps, gap0=None, d0_sq=None, factor=2.0):
    """Iteration count after which projected gradient descent is eps-optimal.

    With ``factor=2`` this is the closed form as usually quoted; the per-step
    contraction 1 - mu/(4 L zeta) chains to ``factor=4``, which the solver uses
    for its own budget.
    """
    k = L / mu
    c = factor * k * zeta_R
    bounds = []
    if gap0 is not None:
        bounds.append(c * math.log(max(gap0 / eps, 1.0)))
    if d0_sq is not None:
        bounds.append(1 + c * math.log(max(L * zeta_R * d0_sq / (2 * eps), 1.0)))
    if not bounds:
        raise ValueError("need gap0 or d0_sq")
    return int(math.ceil(min(bounds)))


# -- projected gradient descent ---------------------------------------------


def _feasible_start(ball, x0):
    if not ball.contains(x0, tol=1e-7):
        raise PreconditionError("start point lies outside the feasible ball")
    return project_ball(ball, x0)


def prgd(problem, x0, eps=None, max_iter=None, counter=None, trace=None, record=True, early_stop=True):
    """Projected Riemannian gradient descent with step 1/L.

    Runs until the gap certificate drops below ``eps`` or the iteration budget
    (derived from ``eps`` when ``max_iter`` is not given) is exhausted.
    Returns ``(x, trace)``; the trace holds one row per iterate, with the
    certificate in ``gap_upper`` and, when the problem carries a reference
    minimiser, the squared distance to it.
    """
    counter = counter or (trace.counter if trace is not None else OracleCounter())
    trace = trace if trace is not None else RunTrace(counter)
    M, ball = problem.manifold, problem.feasible
    L, mu = problem.L, problem.mu
    if eps is None and max_iter is None:
        raise PreconditionError("prgd needs an accuracy eps or a max_iter budget")
    if not L > 0:
        raise PreconditionError("prgd steps with 1/L and needs a smoothness constant L > 0")
    if eps is not None and mu <= 0 and max_iter is None:
        raise PreconditionError("mu = 0: an eps target needs an explicit max_iter budget")
    x = _feasible_start(ball, x0)
    ref = problem.minimizer
    budget = max_iter
    t = 0
    while True:
        g = problem.grad(x)
        counter.grad += 1
        cert = gap_certificate(problem, x, g)
        if t == 0 and eps is not None and mu > 0:
            zR = M.zeta(_radius(problem, x, g))
            T_eps = prgd_iteration_bound(mu, L, zR, eps, d0_sq=ball.diameter**2, factor=4.0)
            budget = T_eps if budget is None else min(budget, T_eps)
        if record:
            trace.log(
                t,
                value=problem.f(x) if problem.f is not None else math.nan,
                gap_upper=cert,
                dist_sq=M.sqdist(x, ref) if ref is not None else math.nan,
                step_radius=M.norm(x, g) / L if L > 0 else math.inf,
            )
        if eps is not None and early_stop and cert <= eps:
            break
        if t >= min(budget, MAX_STEPS):
            break
        x = project_ball(ball, M.exp(x, (-1.0 / L) * g))
        counter.proj += 1
        t += 1
    return x, trace


def warm_start_gap(problem, xbar, counter=None):
    """One projected gradient step and the factor of its certified bound.

    Returns ``(x', c)`` with x' = proj(exp_xbar(-grad/L)) and c = zeta_R L/2,
    R = |grad f(xbar)|/L, so that f(x') - f(p) <= c d(xbar, p)^2 for every
    feasible p.
    """
    counter = counter or OracleCounter()
    M = problem.manifold
    g = problem.grad(xbar)
    counter.grad += 1
    R = M.norm(xbar, g) / problem.L
    xp = project_ball(problem.feasible, M.exp(xbar, (-1.0 / problem.L) * g))
    counter.proj += 1
    return xp, M.zeta(R) * problem.L / 2.0


# -- composite gradient descent ---------------------------------------------


class SquaredDistanceRegularizer:
    """g(y) = (weight/2) d(center, y)^2, restricted to a geodesic ball."""

    def __init__(self, manifold, center, weight):
        if weight <= 0:
            raise PreconditionError("regularizer weight must be positive")
        self.manifold = manifold
        self.center = np.asarray(center, dtype=float)
        self.weight = float(weight)

    @property
    def mu(self):
        return self.weight

    def __call__(self, y):
        return 0.5 * self.weight * self.manifold.sqdist(self.center, y)

    def inner_solve(self, ball, x, g, L):
        """argmin over the ball of <g, log_x y> + L/2 d(x,y)^2 + g(y)."""
        if not isinstance(self.manifold, Euclidean):
            raise UnsupportedStructureError(
                "the composite step has a closed form only on Euclidean space; "
                "use prgd on the summed objective instead"
            )
        m = (L * x - g + self.weight * self.center) / (L + self.weight)
        return project_ball(ball, m)


def composite_rgd(problem, reg, x0, budget, counter=None, trace=None):
    """Composite Riemannian gradient descent on F = f + reg over the ball.

    ``reg`` must provide ``inner_solve``; otherwise the step has no closed form
    and UnsupportedStructureError is raised.
    """
    if not hasattr(reg, "inner_solve"):
        raise UnsupportedStructureError("regularizer has no closed-form composite step")
    counter = counter or (trace.counter if trace is not None else OracleCounter())
    ball = problem.feasible
    x = _feasible_start(ball, x0)
    for t in range(budget + 1):
        if trace is not None:
            trace.log(t, value=problem.f(x) + reg(x))
        if t == budget:
            break
        g = problem.grad(x)
        counter.grad += 1
        x = reg.inner_solve(ball, x, g, problem.L)
        counter.proj += 1
    return x


# -- accelerated proximal point ---------------------------------------------


def prox_accuracy(eps, xi, kappa):
    """Accuracy each proximal subproblem must reach: eps / (8 sqrt(xi) kappa^1.5)."""
    return eps / (8.0 * math.sqrt(xi) * kappa**1.5)


@dataclass(frozen=True)
class ProxParams:
    lam: float
    xi: float
    mu: float
    kappa: float
    eps_hat: float

    @classmethod
    def build(cls, lam, diameter, mubar, eps, manifold):
        if lam <= 0:
            raise PreconditionError("proximal parameter lambda must be positive")
        if mubar <= 0:
            raise PreconditionError(
                "strong convexity mu = 0: regularise first (regularize_gconvex) to use the accelerated method"
            )
        xi = 4.0 * manifold.zeta(2.0 * diameter) - 3.0
        mu = min(mubar, 1.0 / (9.0 * xi * lam))
        kappa = 1.0 / (lam * mu)
        eps_hat = prox_accuracy(eps, xi, kappa) if eps is not None else None
        return cls(lam, xi, mu, kappa, eps_hat)

    def A(self, k):
        return (1.0 + 1.0 / (2.0 * math.sqrt(self.xi * self.kappa))) ** k

    def a(self, k):
        return self.xi * (self.A(k) - self.A(k - 1))


def riemacon_iteration_bound(xi, lam, mubar, d0_sq, eps):
    """2 sqrt(xi max(1/(lam mubar), 9 xi)) log2(2 d0^2 / (lam eps)), rounded up."""
    kappa = max(1.0 / (lam * mubar), 9.0 * xi)
    return int(math.ceil(2.0 * math.sqrt(xi * kappa) * math.log2(max(2.0 * d0_sq / (lam * eps), 1.0))))


def prox_problem(problem, center, lam):
    """h(y) = f(y) + d(center, y)^2/(2 lam) on the same ball."""
    M, ball = problem.manifold, problem.feasible
    f, grad = problem.f, problem.grad
    inv = 1.0 / lam
    return GConvexProblem(
        feasible=ball,
        f=None if f is None else (lambda y: f(y) + 0.5 * inv * M.sqdist(center, y)),
        grad=lambda y: grad(y) - inv * M.log(y, center),
        mu=problem.mu + inv * M.delta(ball.diameter),
        L=problem.L + inv * M.zeta(ball.diameter),
        name=f"{problem.name}:prox",
    )


def default_prox(problem, lam, counter, floor=0.0):
    """Prox subsolver: closed form when the problem declares one, otherwise PRGD."""
    if problem.prox is not None:

        def exact(center, eps_hat):
            counter.prox += 1
            return problem.prox(center, lam)

        return exact

    def solve(center, eps_hat):
        h = prox_problem(problem, center, lam)
        y, _ = prgd(h, project_ball(problem.feasible, center), eps=max(eps_hat, floor), counter=counter, record=False)
        return y

    return solve


def riemacon_abs(
    problem,
    x0,
    lam,
    eps=None,
    T=None,
    prox=None,
    counter=None,
    trace=None,
    record=True,
    stop=None,
    early_stop=True,
    d0_sq=None,
    prox_floor=0.0,
):
    """Accelerated inexact proximal point method with absolute accuracy target.

    ``prox(center, eps_hat)`` must return an eps_hat-minimiser of
    f(y) + d(center, y)^2/(2 lam) over the ball. When ``T`` is not given it
    is derived from ``eps`` with the ball diameter standing in for the unknown
    initial distance (or ``d0_sq`` when supplied). With ``early_stop`` the run
    ends once ``stop(y)`` returns True; the default stop uses the gradient gap
    certificate when the problem has a gradient oracle.

    Returns ``(y_T, trace)``. Trace extras: ``A``, ``zbar_norm``, ``zy`` and
    ``points`` (x_k, y_k, v_k) for offline invariant checks.
    """
    counter = counter or (trace.counter if trace is not None else OracleCounter())
    trace = trace if trace is not None else RunTrace(counter)
    M, ball = problem.manifold, problem.feasible
    Dx = ball.diameter
    if eps is None and T is None:
        raise PreconditionError("riemacon_abs needs eps or T")
    params = ProxParams.build(lam, Dx, problem.mu, eps, M)
    xi, mu = params.xi, params.mu
    eps_hat = params.eps_hat if params.eps_hat is not None else 0.0
    if T is None:
        T = riemacon_iteration_bound(xi, lam, problem.mu, Dx**2 if d0_sq is None else d0_sq, eps)
    if prox is None:
        prox = default_prox(problem, lam, counter, floor=prox_floor)
    if stop is None and early_stop and eps is not None and problem.grad is not None:

        def stop(y):
            g = problem.grad(y)
            counter.grad += 1
            return gap_certificate(problem, y, g) <= eps

    ref = problem.minimizer
    x0 = _feasible_start(ball, x0)
    y = prox(x0, eps_hat)
    zbar = M.zero_vector(y)
    A_prev = 1.0

    def row(k, y, zbar, zy, A):
        if record:
            trace.log(
                k,
                value=problem.f(y) if problem.f is not None else math.nan,
                dist_sq=M.sqdist(y, ref) if ref is not None else math.nan,
                A=A,
                zbar_norm=M.norm(y, zbar),
                zy=zy,
                y=y,
            )

    row(0, y, zbar, zbar, 1.0)
    for k in range(1, T + 1):
        if early_stop and stop is not None and stop(y):
            break
        A = params.A(k)
        a = xi * (A - A_prev)
        y_prev, zbar_prev = y, zbar
        # coupling
        x = M.exp(y_prev, (a / (A_prev + a)) * zbar_prev)
        # approximate implicit gradient step
        y = prox(x, eps_hat)
        v = (-1.0 / lam) * M.log(x, y)
        # mirror descent on the dual point, carried in T_x
        zx_prev = M.log(x, M.exp(y_prev, zbar_prev))
        zx = (A_prev * zx_prev + (a / xi) * (-lam - 2.0 / mu) * v) / A
        zy = M.transport(x, y, zx) + M.log(y, x)
        n = M.norm(y, zy)
        zbar = zy if n <= Dx else (Dx / n) * zy
        if record:
            trace.extras.setdefault("steps", []).append((x, y, v))
        row(k, y, zbar, zy, A)
        A_prev = A
    return y, trace


def riemacon_params(problem, lam, eps):
    return ProxParams.build(lam, problem.feasible.diameter, problem.mu, eps, problem.manifold)


# -- relative contraction ---------------------------------------------------


def relative_contraction_budget(mu, L, zeta_R, rho):
    k = L / mu
    return 1 + int(math.ceil(4.0 * k * zeta_R * math.log(k * zeta_R / rho)))


def relative_contraction_solve(problem, x0, rho, counter=None, backend="prgd", dist_bound=None, return_info=False):
    """Return x with d(x, x*)^2 <= rho d(x0, x*)^2.

    The PRGD backend runs 1 + ceil(4 kappa zeta_R ln(kappa zeta_R / rho))
    projected gradient steps, the count obtained by chaining the per-step
    contraction with d^2 <= 2 gap/mu and the warm-start bound. It exits early
    once the ratio is certified: with r = sqrt(2 cert/mu) >= d(x, x*), the
    ratio holds when r^2 <= rho (d(x0, x) - r)^2.
    """
    if problem.mu <= 0:
        raise UnsupportedStructureError("relative contraction needs strong convexity mu > 0")
    if not 0 < rho < 1:
        raise PreconditionError("contraction factor rho must lie in (0, 1)")
    counter = counter or OracleCounter()
    M, ball, mu, L = problem.manifold, problem.feasible, problem.mu, problem.L
    x0 = _feasible_start(ball, x0)

    def certified(x, g):
        cert = gap_certificate(problem, x, g)
        r = math.sqrt(2.0 * cert / mu)
        lower = max(M.dist(x0, x) - r, 0.0)
        return r * r <= rho * lower * lower

    if backend == "riemacon":
        D = dist_bound if dist_bound is not None else ball.diameter

        def stop(y):
            g = problem.grad(y)
            counter.grad += 1
            return certified(y, g)

        y, tr = riemacon_abs(problem, x0, 1.0 / L, eps=1e-3 * rho * mu * D * D, stop=stop, counter=counter, record=False)
        return (y, {"steps": len(tr)}) if return_info else y
    if backend != "prgd":
        raise PreconditionError(f"unknown backend {backend!r}")

    x = x0
    T = None
    t = 0
    early = False
    while True:
        g = problem.grad(x)
        counter.grad += 1
        if T is None:
            T = relative_contraction_budget(mu, L, M.zeta(_radius(problem, x0, g)), rho)
        if certified(x, g):
            early = True
            break
        if t >= T:
            break
        x = project_ball(ball, M.exp(x, (-1.0 / L) * g))
        counter.proj += 1
        t += 1
    if return_info:
        return x, {"steps": t, "budget": T, "certified": early}
    return x


# -- g-convex reduction -----------------------------------------------------


def regularize_gconvex(problem, x0, eps, D):
    """f + (eps/D^2) d(x0, .)^2 on B(x0, D/2): strongly convex with mu = 2 eps/D^2.

    An eps/2-minimiser of the result is an eps-minimiser of f when
    d(x0, x*) <= D/2.
    """
    if D is None or D <= 0:
        raise PreconditionError("the regularised reduction needs a distance bound D > 0")
    M = problem.manifold
    c = eps / D**2
    f, grad = problem.f, problem.grad
    x0 = np.asarray(x0, dtype=float)
    ball = GeodesicBall(M, x0, D / 2.0)
    return GConvexProblem(
        feasible=ball,
        f=None if f is None else (lambda y: f(y) + c * M.sqdist(x0, y)),
        grad=lambda y: grad(y) - 2.0 * c * M.log(y, x0),
        mu=problem.mu + 2.0 * c,
        L=problem.L + 2.0 * c * M.zeta(ball.diameter),
        name=f"{problem.name}:regularized",
    )
