"""Test problems with known or oracle-computable solutions, and validators."""
import math

import numpy as np

from .errors import DomainError, PreconditionError, UnsupportedStructureError
from .gconvex import prgd
from .geometry import GeodesicBall, project_ball
from .manifolds import Euclidean, Hyperboloid
from .minmax import best_response_x, best_response_y
from .problem import GConvexProblem, MinMaxProblem

MEASURE_SLACK = 1.1


def _arr(p):
    return np.asarray(p, dtype=float)


# -- exact ball-constrained quadratics ------------------------------------------


def ball_quadratic_argmin(a, b, center, radius, iters=200):
    """argmin of sum_i a_i x_i^2 / 2 + b.x over the Euclidean ball B(center, radius), a_i >= 0.

    Stationarity with multiplier nu gives x(nu) = (nu c - b) / (a + nu); the
    distance |x(nu) - c| decreases in nu, so the active root is bracketed
    and bisected.
    """
    a, b, c = _arr(a), _arr(b), _arr(center)

    def at(nu):
        return (nu * c - b) / (a + nu)

    if np.all(a > 0):
        x = -b / a
        if np.linalg.norm(x - c) <= radius:
            return x
    lo, hi = 0.0, 1.0
    while np.linalg.norm(at(hi) - c) > radius:
        hi *= 2.0
        if hi > 1e300:
            break
    if lo == 0.0 and np.any(a <= 0):
        lo = 1e-300
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(at(mid) - c) > radius:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    x = at(hi)
    n = np.linalg.norm(x - c)
    return x if n <= radius else c + (radius / n) * (x - c)


def diagonal_quadratic(eigs, target, radius, center=None):
    """f(x) = sum_i eigs_i (x_i - target_i)^2 / 2 on a Euclidean ball, with exact prox."""
    eigs, target = _arr(eigs), _arr(target)
    n = eigs.size
    center = np.zeros(n) if center is None else _arr(center)
    M = Euclidean(n)
    ball = GeodesicBall(M, center, radius)

    def prox(c, lam):
        inv = 1.0 / lam
        return ball_quadratic_argmin(eigs + inv, -(eigs * target + inv * _arr(c)), center, radius)

    xstar = ball_quadratic_argmin(eigs, -eigs * target, center, radius)
    f = lambda x: 0.5 * float(np.sum(eigs * (x - target) ** 2))
    lip = float(np.max(eigs)) * (np.linalg.norm(target - center) + radius)
    return GConvexProblem(
        feasible=ball,
        f=f,
        grad=lambda x: eigs * (x - target),
        mu=float(np.min(eigs)),
        L=float(np.max(eigs)),
        lip=lip,
        prox=prox,
        minimizer=xstar,
        fstar=f(xstar),
        name="diagonal-quadratic",
    )


def karcher_problem(manifold, anchors, weights, center, radius, minimizer=None):
    """Weighted Karcher objective sum_i w_i d^2(x, p_i)/2 on a geodesic ball."""
    M = manifold
    P = _arr(anchors)
    w = _arr(weights)
    ball = GeodesicBall(M, center, radius)
    reach = M.dist_matrix(_arr(center)[None, :], P)[0] + radius

    def f(x):
        d = M.dist_matrix(x[None, :], P)[0]
        return 0.5 * float(w @ d**2)

    def grad(x):
        V = M.log_batch(np.broadcast_to(x, P.shape).copy(), P)
        return -(w @ V)

    return GConvexProblem(
        feasible=ball,
        f=f,
        grad=grad,
        mu=float(w.sum()) * M.delta(2 * radius),
        L=float(sum(wi * M.zeta(r) for wi, r in zip(w, reach))),
        lip=float(w @ reach),
        minimizer=minimizer,
        name="karcher",
    )


def random_karcher(rng, dim=2, m=5, spread=1.5, radius=1.0, scale=1.0):
    """Karcher instance on the hyperboloid with anchors spread around the origin."""
    M = Hyperboloid(dim, scale)
    o = M.origin()
    P = np.array([M.random_point(rng, o, spread) for _ in range(m)])
    w = rng.uniform(0.5, 1.5, size=m)
    w /= w.sum()
    return karcher_problem(M, P, w, o, radius)


def solve_reference(problem, tol=1e-13, max_iter=200000):
    """High-accuracy minimiser of a strongly convex problem by projected gradient descent."""
    x, tr = prgd(problem, problem.feasible.center, eps=tol, max_iter=max_iter, record=True)
    return x, tr.last[4]


# -- min-max instances ----------------------------------------------------------


def quadratic_saddle(A, B, C, radius_x=1.0, radius_y=1.0):
    """f(x, y) = x'Ax/2 - y'By/2 + x'Cy on centred Euclidean balls, A and B diagonal.

    The saddle is the origin; best responses are exact ball-constrained
    quadratic solves.
    """
    a, b = _arr(A), _arr(B)
    C = np.atleast_2d(_arr(C))
    n, m = a.size, b.size
    X = GeodesicBall(Euclidean(n), np.zeros(n), radius_x)
    Y = GeodesicBall(Euclidean(m), np.zeros(m), radius_y)
    Lxy = float(np.linalg.norm(C, 2)) if C.size else 0.0

    def f(x, y):
        return 0.5 * float(x @ (a * x)) - 0.5 * float(y @ (b * y)) + float(x @ C @ y)

    def f_grid(Xs, Ys):
        return (0.5 * np.sum(Xs * Xs * a, axis=1))[:, None] - (0.5 * np.sum(Ys * Ys * b, axis=1))[None, :] + Xs @ C @ Ys.T

    return MinMaxProblem(
        X=X,
        Y=Y,
        f=f,
        grad_x=lambda x, y: a * x + C @ y,
        grad_y=lambda x, y: -b * y + C.T @ x,
        Lx=float(a.max()),
        Ly=float(b.max()),
        Lxy=Lxy,
        mu_x=float(a.min()),
        mu_y=float(b.min()),
        saddle=(np.zeros(n), np.zeros(m)),
        best_response_x=lambda y: ball_quadratic_argmin(a, C @ y, np.zeros(n), radius_x),
        best_response_y=lambda x: ball_quadratic_argmin(b, -(C.T @ x), np.zeros(m), radius_y),
        f_grid=f_grid,
        lip_x=float(a.max()) * radius_x + Lxy * radius_y,
        lip_y=float(b.max()) * radius_y + Lxy * radius_x,
        name="quadratic-saddle",
    )


def coupled_quadratic(mu_x, mu_y, c, dim=1, radius=1.0):
    """mu_x |x|^2/2 - mu_y |y|^2/2 + c x.y: the weak-interaction family when c < sqrt(mu_x mu_y)/2."""
    return quadratic_saddle(np.full(dim, mu_x), np.full(dim, mu_y), c * np.eye(dim), radius, radius)


def bilinear_problem(C, radius=1.0):
    """f(x, y) = x'Cy on centred Euclidean balls: convex-concave with saddle at the origin."""
    C = np.atleast_2d(_arr(C))
    n, m = C.shape
    X = GeodesicBall(Euclidean(n), np.zeros(n), radius)
    Y = GeodesicBall(Euclidean(m), np.zeros(m), radius)
    Lxy = float(np.linalg.norm(C, 2))

    def linear_min(g, sign):
        nrm = np.linalg.norm(g)
        return np.zeros_like(g) if nrm == 0 else (sign * radius / nrm) * g

    return MinMaxProblem(
        X=X,
        Y=Y,
        f=lambda x, y: float(x @ C @ y),
        grad_x=lambda x, y: C @ y,
        grad_y=lambda x, y: C.T @ x,
        Lx=0.0,
        Ly=0.0,
        Lxy=Lxy,
        mu_x=0.0,
        mu_y=0.0,
        saddle=(np.zeros(n), np.zeros(m)),
        best_response_x=lambda y: linear_min(C @ y, -1.0),
        best_response_y=lambda x: linear_min(C.T @ x, 1.0),
        f_grid=lambda Xs, Ys: Xs @ C @ Ys.T,
        lip_x=Lxy * radius,
        lip_y=Lxy * radius,
        name="bilinear",
    )


def hyperbolic_line_cc(alpha, beta, gamma, anchor=0.0, radius_x=1.0, radius_y=1.0):
    """CC instance on the hyperbolic line times the real line.

    f(x, y) = alpha d^2(x, p)/2 + beta s(x) y - gamma y^2/2, where s is the
    signed arclength along the line (a geodesically linear function) and p
    sits at arclength ``anchor``. The x-ball and y-ball are centred at zero.
    """
    H = Hyperboloid(1)
    R = Euclidean(1)
    X = GeodesicBall(H, H.origin(), radius_x)
    Y = GeodesicBall(R, np.zeros(1), radius_y)
    p = H.from_spatial([math.sinh(anchor)])

    def s(x):
        return math.asinh(x[1])

    def f(x, y):
        return 0.5 * alpha * (s(x) - anchor) ** 2 + beta * s(x) * y[0] - 0.5 * gamma * y[0] ** 2

    def grad_x(x, y):
        e = np.array([x[1], x[0]])
        return (alpha * (s(x) - anchor) + beta * y[0]) * e

    def point(t):
        return H.from_spatial([math.sinh(t)])

    def best_x(y):
        # minimise alpha (t - anchor)^2/2 + beta t y over t in [-radius_x, radius_x]
        lin = beta * y[0]
        if alpha > 0:
            t = anchor - lin / alpha
        else:
            t = 0.0 if lin == 0 else -math.copysign(radius_x, lin)
        return point(min(max(t, -radius_x), radius_x))

    def best_y(x):
        lin = beta * s(x)
        if gamma > 0:
            v = lin / gamma
        else:
            v = 0.0 if lin == 0 else math.copysign(radius_y, lin)
        return np.array([min(max(v, -radius_y), radius_y)])

    def f_grid(Xs, Ys):
        sx = np.arcsinh(Xs[:, 1])[:, None]
        yy = Ys[:, 0][None, :]
        return 0.5 * alpha * (sx - anchor) ** 2 + beta * sx * yy - 0.5 * gamma * yy**2

    return MinMaxProblem(
        X=X,
        Y=Y,
        f=f,
        grad_x=grad_x,
        grad_y=lambda x, y: np.array([beta * s(x) - gamma * y[0]]),
        Lx=alpha,
        Ly=gamma,
        Lxy=abs(beta),
        mu_x=0.0,
        mu_y=0.0,
        best_response_x=best_x,
        best_response_y=best_y,
        f_grid=f_grid,
        lip_x=alpha * (radius_x + abs(anchor)) + abs(beta) * radius_y,
        lip_y=abs(beta) * radius_x + gamma * radius_y,
        name="hyperbolic-line-cc",
        meta={"anchor_point": p},
    )


# -- synthetic coupled saddle ---------------------------------------------------


def _h(d, sinh_d):
    """d / sinh(d) and its derivative in t = cosh(d)."""
    if d < 1e-4:
        d2 = d * d
        return 1.0 - d2 / 6.0 + 7.0 * d2 * d2 / 360.0, -1.0 / 3.0 + 2.0 * d2 / 15.0
    h = d / sinh_d
    return h, (1.0 - math.cosh(d) * h) / (sinh_d * sinh_d)


class LogCoordinates:
    """Coordinates u(x) of log_p(x) in the orthonormal frame at p, with gradients of <c, u(x)>."""

    def __init__(self, manifold, p):
        self.M = manifold
        self.p = _arr(p)
        if isinstance(manifold, Hyperboloid):
            self.Binv = manifold.boost_inverse(self.p)
        elif not isinstance(manifold, Euclidean):
            raise UnsupportedStructureError("log coordinates are implemented for Euclidean and hyperboloid models")

    def __call__(self, x):
        M = self.M
        if isinstance(M, Euclidean):
            return M.scale * (x - self.p)
        z = self.Binv @ x
        zs = z[1:]
        n = np.linalg.norm(zs)
        d = math.asinh(n)
        h, _ = _h(d, n)
        return M.scale * h * zs

    def grad(self, x, c):
        """Riemannian gradient of x -> <c, u(x)>."""
        M = self.M
        c = _arr(c)
        if isinstance(M, Euclidean):
            return M.rgrad(x, M.scale * c)
        z = self.Binv @ x
        zs = z[1:]
        n = np.linalg.norm(zs)
        d = math.asinh(n)
        h, dh = _h(d, n)
        gz = np.empty_like(z)
        gz[0] = dh * float(c @ zs)
        gz[1:] = h * c
        # Binv is symmetric, so it is its own transpose
        return M.rgrad(x, M.scale * (self.Binv @ gz))


class SyntheticSaddle:
    """f(x, y) = (a/2) d^2(x, p) - (b/2) d^2(y, q) + <A u(x), w(y)>.

    u and w are log coordinates at p and q, so (p, q) is a critical point and,
    where f is strongly convex-concave, the saddle. Curvature and coupling
    constants are measured by sampling at construction and inflated by
    ``slack``.
    """

    def __init__(self, Mx, My, p, q, a, b, A, center_x=None, center_y=None, radius_x=1.0, radius_y=1.0,
                 rng=None, samples=400, slack=MEASURE_SLACK):
        self.Mx, self.My = Mx, My
        self.p, self.q = _arr(p), _arr(q)
        self.a, self.b = float(a), float(b)
        self.A = np.atleast_2d(_arr(A))
        if self.A.shape != (Mx.dim, My.dim):
            raise DomainError(f"coupling matrix must be {Mx.dim}x{My.dim}")
        self.u = LogCoordinates(Mx, self.p)
        self.w = LogCoordinates(My, self.q)
        cx = self.p if center_x is None else _arr(center_x)
        cy = self.q if center_y is None else _arr(center_y)
        self.X = GeodesicBall(Mx, cx, radius_x)
        self.Y = GeodesicBall(My, cy, radius_y)
        if not (self.X.contains(self.p) and self.Y.contains(self.q)):
            raise PreconditionError("reference points must lie in the feasible balls")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.measured = measure_constants(self._raw_problem(), rng, samples)
        m = self.measured
        if m["mu_x"] <= 0 or m["mu_y"] <= 0:
            raise PreconditionError("sampled curvature is not positive: shrink the balls or the coupling")
        self.problem = self._raw_problem(
            Lx=m["Lx"] * slack,
            Ly=m["Ly"] * slack,
            Lxy=m["Lxy"] * slack,
            mu_x=m["mu_x"] / slack,
            mu_y=m["mu_y"] / slack,
        )

    def f(self, x, y):
        return (
            0.5 * self.a * self.Mx.sqdist(x, self.p)
            - 0.5 * self.b * self.My.sqdist(y, self.q)
            + float(self.u(x) @ self.A @ self.w(y))
        )

    def grad_x(self, x, y):
        return -self.a * self.Mx.log(x, self.p) + self.u.grad(x, self.A @ self.w(y))

    def grad_y(self, x, y):
        return self.b * self.My.log(y, self.q) + self.w.grad(y, self.A.T @ self.u(x))

    def _raw_problem(self, **c):
        consts = dict(Lx=1.0, Ly=1.0, Lxy=0.0, mu_x=0.0, mu_y=0.0)
        consts.update(c)
        return MinMaxProblem(
            X=self.X,
            Y=self.Y,
            f=self.f,
            grad_x=self.grad_x,
            grad_y=self.grad_y,
            saddle=(self.p, self.q),
            name="synthetic-saddle",
            **consts,
        )


def synthetic_saddle(rng, kind="hyperboloid", dim=2, a=1.0, b=1.0, coupling=0.3, radius=0.8, offset=0.3,
                     samples=400):
    """Random SyntheticSaddle instance; ``coupling`` is the spectral norm of A."""
    Mx = Hyperboloid(dim) if kind == "hyperboloid" else Euclidean(dim)
    My = Hyperboloid(dim) if kind == "hyperboloid" else Euclidean(dim)
    cx, cy = Mx.origin(), My.origin()
    p = Mx.random_point(rng, cx, offset)
    q = My.random_point(rng, cy, offset)
    A = rng.standard_normal((dim, dim))
    nrm = np.linalg.norm(A, 2)
    A = A * (coupling / nrm) if nrm > 0 else A
    return SyntheticSaddle(Mx, My, p, q, a, b, A, cx, cy, radius, radius, rng=rng, samples=samples).problem


# -- robust Karcher -------------------------------------------------------------


def simplex_basis(m):
    """Orthonormal basis (m x (m-1)) of the sum-zero subspace of R^m."""
    E = np.eye(m)[:, : m - 1] - 1.0 / m
    Q, _ = np.linalg.qr(E)
    return Q


def robust_karcher(manifold, anchors, lam_w, center=None, radius=1.0, margin=None):
    """min_x max_w sum_i w_i d^2(x, p_i) - (lam_w/2)|w - 1/m|^2 with w in the simplex.

    Weights are parametrised as w = 1/m + U z with U an orthonormal basis of
    the sum-zero subspace, and z ranges over a Euclidean ball small enough to
    keep every weight above ``margin``. The y-side best response is exact.
    """
    M = manifold
    P = _arr(anchors)
    m = P.shape[0]
    if m < 2:
        raise DomainError("robust Karcher needs at least two anchors")
    if lam_w <= 0:
        raise DomainError("weight regularisation must be positive")
    margin = 0.25 / m if margin is None else margin
    U = simplex_basis(m)
    rz = (1.0 / m - margin) / math.sqrt(1.0 - 1.0 / m)
    if rz <= 0:
        raise DomainError("weight margin leaves no room for the weights")
    center = M.origin() if center is None else _arr(center)
    X = GeodesicBall(M, center, radius)
    Z = GeodesicBall(Euclidean(m - 1), np.zeros(m - 1), rz)
    reach = M.dist_matrix(center[None, :], P)[0] + radius

    def weights(z):
        return 1.0 / m + U @ z

    def sq(x):
        return M.dist_matrix(x[None, :], P)[0] ** 2

    def f(x, z):
        return float(weights(z) @ sq(x)) - 0.5 * lam_w * float(z @ z)

    def grad_x(x, z):
        V = M.log_batch(np.broadcast_to(x, P.shape).copy(), P)
        return -2.0 * (weights(z) @ V)

    def grad_y(x, z):
        return U.T @ sq(x) - lam_w * z

    def best_y(x):
        return project_ball(Z, U.T @ sq(x) / lam_w)

    def f_grid(Xs, Zs):
        D2 = M.dist_matrix(Xs, P) ** 2
        W = 1.0 / m + Zs @ U.T
        return D2 @ W.T - 0.5 * lam_w * np.sum(Zs * Zs, axis=1)[None, :]

    return MinMaxProblem(
        X=X,
        Y=Z,
        f=f,
        grad_x=grad_x,
        grad_y=grad_y,
        Lx=2.0 * max(M.zeta(r) for r in reach),
        Ly=lam_w,
        Lxy=2.0 * float(np.sqrt(np.sum(reach**2))),
        mu_x=2.0 * M.delta(X.diameter),
        mu_y=lam_w,
        best_response_y=best_y,
        f_grid=f_grid,
        lip_x=2.0 * float(reach.max()),
        lip_y=float(np.sqrt(np.sum(reach**4))) + lam_w * rz,
        name="robust-karcher",
        meta={"anchors": P, "basis": U, "weights": weights},
    )


def random_robust_karcher(rng, dim=2, m=3, lam_w=8.0, spread=0.6, radius=0.6, scale=1.0):
    M = Hyperboloid(dim, scale)
    o = M.origin()
    P = np.array([M.random_point(rng, o, spread) for _ in range(m)])
    return robust_karcher(M, P, lam_w, o, radius)


def reference_saddle(problem, tol=1e-13, max_iter=100000):
    """Saddle of a problem with an exact y best response.

    Minimises phi(x) = max_y f(x, y) by projected gradient descent using the
    envelope gradient grad_x f(x, y*(x)); phi is mu_x-strongly convex and
    (Lx + Lxy^2/mu_y)-smooth.
    """
    bry = problem.best_response_y
    if bry is None:
        raise UnsupportedStructureError("reference_saddle needs an exact y best response")
    phi = GConvexProblem(
        feasible=problem.X,
        f=lambda x: problem.f(x, bry(x)),
        grad=lambda x: problem.grad_x(x, bry(x)),
        mu=problem.mu_x,
        L=problem.Lx + problem.Lxy**2 / problem.mu_y,
        lip=problem.lip_x,
    )
    x, _ = prgd(phi, problem.X.center, eps=tol, max_iter=max_iter, record=False)
    return x, bry(x)


# -- oracles and validators -----------------------------------------------------


def brute_force_best_response(problem, fixed, which="y", mode="solve", tol=1e-10, per_axis=41):
    """Best response to ``fixed``: argmax_y f(fixed, y) (which="y") or argmin_x f(x, fixed).

    ``mode="solve"`` uses projected gradient descent to ``tol``;
    ``mode="grid"`` scans a geodesic grid of the ball (at most 3 dimensions).
    Returns ``(point, value)``.
    """
    fixed = _arr(fixed)
    if mode == "solve":
        if which == "y":
            y, v, _ = best_response_y(problem, fixed, tol)
            return y, v
        x, v, _ = best_response_x(problem, fixed, tol)
        return x, v
    if mode != "grid":
        raise DomainError(f"unknown oracle mode {mode!r}")
    ball = problem.Y if which == "y" else problem.X
    if ball.manifold.dim > 3:
        raise UnsupportedStructureError("grid oracle supports at most 3 dimensions; use mode='solve'")
    G, _ = ball.grid(per_axis)
    if problem.f_grid is not None:
        vals = problem.f_grid(fixed[None, :], G)[0] if which == "y" else problem.f_grid(G, fixed[None, :])[:, 0]
    elif which == "y":
        vals = np.array([problem.f(fixed, g) for g in G])
    else:
        vals = np.array([problem.f(g, fixed) for g in G])
    i = int(np.argmax(vals)) if which == "y" else int(np.argmin(vals))
    return G[i], float(vals[i])


def sion_check(problem, per_axis_x=41, per_axis_y=41):
    """min-max and max-min of f over geodesic grids of both balls.

    Returns a dict with the difference, both values, the mesh sizes and the
    bound Lip_x h_x + Lip_y h_y that the difference must respect when f is
    convex-concave.
    """
    GX, hx = problem.X.grid(per_axis_x)
    GY, hy = problem.Y.grid(per_axis_y)
    if len(GX) > 10_000 or len(GY) > 10_000:
        raise DomainError("grids are limited to 10^4 points per variable")
    if problem.f_grid is not None:
        F = problem.f_grid(GX, GY)
    else:
        F = np.array([[problem.f(x, y) for y in GY] for x in GX])
    minmax = float(F.max(axis=1).min())
    maxmin = float(F.min(axis=0).max())
    lx, ly = problem.lipschitz_bounds()
    return {
        "diff": abs(minmax - maxmin),
        "minmax": minmax,
        "maxmin": maxmin,
        "mesh_x": hx,
        "mesh_y": hy,
        "bound": lx * hx + ly * hy,
    }


def finite_diff_gradient_check(f, grad, manifold, x, h=1e-5, n_dirs=8, rng=None):
    """Largest relative mismatch between central differences along geodesics and <grad, e>.

    For unit tangent directions e the error is
    |(f(exp_x(h e)) - f(exp_x(-h e)))/(2h) - <grad f(x), e>| / (1 + |<grad f(x), e>|).
    """
    if not 1e-7 <= h <= 1e-3:
        raise DomainError("finite-difference step must lie in [1e-7, 1e-3]")
    M = manifold
    rng = rng if rng is not None else np.random.default_rng(0)
    g = grad(x)
    worst = 0.0
    for _ in range(n_dirs):
        e = M.random_tangent(rng, x, norm=1.0)
        fd = (f(M.exp(x, h * e)) - f(M.exp(x, -h * e))) / (2.0 * h)
        an = M.inner(x, g, e)
        worst = max(worst, abs(fd - an) / (1.0 + abs(an)))
    return worst


def minmax_gradient_check(problem, x, y, h=1e-5, n_dirs=8, rng=None):
    """finite_diff_gradient_check on both partial gradients; returns the larger error."""
    ex = finite_diff_gradient_check(lambda a: problem.f(a, y), lambda a: problem.grad_x(a, y), problem.M, x, h, n_dirs, rng)
    ey = finite_diff_gradient_check(lambda b: problem.f(x, b), lambda b: problem.grad_y(x, b), problem.N, y, h, n_dirs, rng)
    return max(ex, ey)


def directional_curvature(grad, manifold, x, e, h=1e-5):
    """Second derivative of f along the unit-speed geodesic through x in direction e."""
    M = manifold
    xp, xm = M.exp(x, h * e), M.exp(x, -h * e)
    gp = M.transport(xp, x, grad(xp))
    gm = M.transport(xm, x, grad(xm))
    return M.inner(x, gp - gm, e) / (2.0 * h)


def measure_constants(problem, rng, samples=400, h=1e-5):
    """Sampled curvature and coupling constants of a min-max problem on its balls.

    Returns the smallest and largest second derivatives of f(., y) and
    -f(x, .) along random geodesics, and the largest ratio of partial
    gradient changes to the distance moved in the other variable.
    """
    X, Y = problem.X, problem.Y
    M, N = problem.M, problem.N
    gx, gy = problem.grad_x, problem.grad_y
    cx, cy, cxy = [], [], []
    for i in range(samples):
        x, y = X.sample(rng), Y.sample(rng)
        if i % 4 == 0:
            x = project_ball(X, M.exp(X.center, M.random_tangent(rng, X.center, norm=X.radius)))
            y = project_ball(Y, N.exp(Y.center, N.random_tangent(rng, Y.center, norm=Y.radius)))
        ex = M.random_tangent(rng, x, norm=1.0)
        ey = N.random_tangent(rng, y, norm=1.0)
        cx.append(directional_curvature(lambda a: gx(a, y), M, x, ex, h))
        cy.append(directional_curvature(lambda b: -gy(x, b), N, y, ey, h))
        # mixed derivative: change of grad_x along a y-geodesic and of grad_y along an x-geodesic
        step = 1e-4 if i % 2 == 0 else rng.uniform(0.05, 0.5)
        y2 = project_ball(Y, N.exp(y, step * ey))
        x2 = project_ball(X, M.exp(x, step * ex))
        dy, dx = N.dist(y, y2), M.dist(x, x2)
        if dy > 1e-9:
            cxy.append(M.norm(x, gx(x, y2) - gx(x, y)) / dy)
        if dx > 1e-9:
            cxy.append(N.norm(y, gy(x2, y) - gy(x, y)) / dx)
    return {
        "mu_x": float(min(cx)),
        "Lx": float(max(cx)),
        "mu_y": float(min(cy)),
        "Ly": float(max(cy)),
        "Lxy": float(max(cxy)),
    }
