"""Manifold interface, curvature constants, geodesic balls and projection."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolation, DomainError

POINT_TOL = 1e-9


def zeta(R, kmin):
    """Curvature constant bounding the Hessian of half squared distance from above.

    Equals ``t * coth(t)`` with ``t = R * sqrt(-kmin)`` when ``kmin < 0`` and 1
    otherwise.
    """
    if R < 0:
        raise DomainError(f"radius must be nonnegative, got {R}")
    if kmin >= 0:
        return 1.0
    t = R * math.sqrt(-kmin)
    if t < 1e-4:
        return 1.0 + t * t / 3.0
    return t / math.tanh(t)


def delta(R, kmax):
    """Curvature constant bounding the Hessian of half squared distance from below.

    Equals ``t * cot(t)`` with ``t = R * sqrt(kmax)`` when ``kmax > 0`` and 1
    otherwise. Requires ``t < pi``.
    """
    if R < 0:
        raise DomainError(f"radius must be nonnegative, got {R}")
    if kmax <= 0:
        return 1.0
    t = R * math.sqrt(kmax)
    if t >= math.pi:
        raise DomainError(f"R*sqrt(kmax) = {t} must be below pi")
    if t < 1e-4:
        return 1.0 - t * t / 3.0
    return t / math.tan(t)


@dataclass(frozen=True)
class CurvatureBounds:
    kmin: float
    kmax: float

    def __post_init__(self):
        if self.kmin > self.kmax:
            raise DomainError(f"kmin={self.kmin} exceeds kmax={self.kmax}")

    @property
    def hadamard(self):
        return self.kmax <= 0


class Manifold:
    """Common interface of the manifold models.

    Points and tangent vectors are plain float arrays in ambient coordinates.
    ``scale`` multiplies every distance: a model with scale ``c`` carries the
    metric ``c**2 * g`` of its unit-curvature counterpart, so its curvature is
    divided by ``c**2``.
    """

    name = "manifold"

    def __init__(self, dim, scale=1.0):
        if int(dim) != dim or dim < 1:
            raise DomainError(f"dimension must be a positive integer, got {dim}")
        if not scale > 0:
            raise DomainError(f"metric scale must be positive, got {scale}")
        self.dim = int(dim)
        self.scale = float(scale)

    # subclasses fill in -------------------------------------------------
    ambient_dim = None

    @property
    def curvature(self):
        raise NotImplementedError

    def inner(self, x, u, v):
        raise NotImplementedError

    def dist(self, x, y):
        raise NotImplementedError

    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def transport(self, y, x, v):
        """Parallel transport of ``v`` from ``T_y`` to ``T_x`` along the geodesic."""
        raise NotImplementedError

    def proj_tangent(self, x, u):
        raise NotImplementedError

    def point_residual(self, x):
        raise NotImplementedError

    def tangent_residual(self, x, v):
        raise NotImplementedError

    def tangent_basis(self, x):
        raise NotImplementedError

    def origin(self):
        raise NotImplementedError

    def scaled(self, c):
        raise NotImplementedError

    def rgrad(self, x, egrad):
        """Riemannian gradient from the Euclidean gradient of an ambient extension."""
        raise NotImplementedError

    # shared helpers -----------------------------------------------------
    @property
    def kmin(self):
        return self.curvature.kmin

    @property
    def kmax(self):
        return self.curvature.kmax

    def zeta(self, R):
        return zeta(R, self.kmin)

    def delta(self, R):
        return delta(R, self.kmax)

    def norm(self, x, u):
        return math.sqrt(max(self.inner(x, u, u), 0.0))

    def sqdist(self, x, y):
        return self.dist(x, y) ** 2

    def zero_vector(self, x):
        return np.zeros(self.ambient_dim)

    def geodesic(self, x, y, t):
        return self.exp(x, t * self.log(x, y))

    def check_point(self, x, tol=POINT_TOL):
        r = self.point_residual(x)
        if r > tol:
            raise ConstraintViolation(f"point off {self.name} by {r:.3e}")
        return x

    def check_tangent(self, x, v, tol=POINT_TOL):
        r = self.tangent_residual(x, v)
        if r > tol:
            raise ConstraintViolation(f"vector leaves the tangent space by {r:.3e}")
        return v

    def tangent_coords(self, x, v):
        """Coordinates of ``v`` in the orthonormal basis returned by tangent_basis."""
        E = self.tangent_basis(x)
        return np.array([self.inner(x, e, v) for e in E])

    def from_tangent_coords(self, x, c):
        return np.asarray(c, dtype=float) @ self.tangent_basis(x)

    def random_tangent(self, rng, x, norm=None):
        c = rng.standard_normal(self.dim)
        if norm is not None:
            c *= norm / np.linalg.norm(c)
        return self.from_tangent_coords(x, c)

    def random_point(self, rng, center=None, radius=1.0):
        """Point drawn uniformly by volume of the tangent ball at ``center``."""
        if center is None:
            center = self.origin()
        c = rng.standard_normal(self.dim)
        c *= radius * rng.uniform() ** (1.0 / self.dim) / np.linalg.norm(c)
        return self.exp(center, self.from_tangent_coords(center, c))

    # batched defaults, overridden where a kernel exists
    def dist_batch(self, X, Y):
        return np.array([self.dist(x, y) for x, y in zip(X, Y)])

    def dist_matrix(self, X, P):
        return np.array([[self.dist(x, p) for p in P] for x in X])

    def exp_batch(self, X, V):
        return np.array([self.exp(x, v) for x, v in zip(X, V)])

    def log_batch(self, X, Y):
        return np.array([self.log(x, y) for x, y in zip(X, Y)])

    def inner_batch(self, X, U, V):
        return np.array([self.inner(x, u, v) for x, u, v in zip(X, U, V)])

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, scale={self.scale:g})"


class GeodesicBall:
    """Closed geodesic ball, the feasible set used by every solver."""

    def __init__(self, manifold, center, radius):
        if not (np.isfinite(radius) and radius > 0):
            raise DomainError(f"ball radius must be finite and positive, got {radius}")
        self.manifold = manifold
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        manifold.check_point(self.center)

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, p, tol=POINT_TOL):
        return self.manifold.dist(self.center, p) <= self.radius + tol

    def project(self, p):
        return project_ball(self, p)

    def sample(self, rng, n=None):
        if n is None:
            return self.manifold.random_point(rng, self.center, self.radius)
        return np.array([self.manifold.random_point(rng, self.center, self.radius) for _ in range(n)])

    def grid(self, per_axis):
        """Geodesic grid: exp_center of a Cartesian grid clipped to the tangent ball.

        Returns the grid points and the mesh size, an upper bound on the
        distance from any point of the ball to its nearest grid point.
        """
        M = self.manifold
        if M.dim > 3:
            raise DomainError("grid discretisation supports at most 3 dimensions")
        r = self.radius
        ticks = np.linspace(-r, r, per_axis)
        h = ticks[1] - ticks[0] if per_axis > 1 else 2 * r
        mesh = np.stack(np.meshgrid(*([ticks] * M.dim), indexing="ij"), axis=-1).reshape(-1, M.dim)
        norms = np.linalg.norm(mesh, axis=1)
        # keep the cube cells that touch the ball, then pull outer nodes onto the sphere
        keep = norms <= r + h * math.sqrt(M.dim) / 2
        mesh = mesh[keep]
        norms = norms[keep]
        over = norms > r
        mesh[over] *= (r / norms[over])[:, None]
        E = M.tangent_basis(self.center)
        V = mesh @ E
        X = M.exp_batch(np.broadcast_to(self.center, V.shape).copy(), V)
        # the exponential map at the center expands distances on Hadamard
        # manifolds, so the spacing in the tangent grid does not bound the mesh;
        # scale by the worst-case expansion of exp on the ball.
        expansion = _exp_expansion(M, r)
        return X, expansion * h * math.sqrt(M.dim) / 2

    def __repr__(self):
        return f"GeodesicBall({self.manifold!r}, radius={self.radius:g})"


def _exp_expansion(manifold, r):
    # Rauch comparison against constant curvature kmin: a tangent displacement at
    # radius r stretches by at most sinh(r sqrt|k|)/(r sqrt|k|).
    k = manifold.kmin
    if k >= 0:
        return 1.0
    t = r * math.sqrt(-k)
    return math.sinh(t) / t if t > 0 else 1.0


def project_ball(ball, p):
    """Metric projection onto a geodesic ball.

    Points inside are returned unchanged; points outside are pulled back along
    the geodesic to the center until they hit the sphere.
    """
    M = ball.manifold
    v = M.log(ball.center, p)
    n = M.norm(ball.center, v)
    if n <= ball.radius:
        return p
    return M.exp(ball.center, (ball.radius / n) * v)


def cosine_law_slacks(manifold, x, y, p, D):
    """Slacks of the lower and upper cosine-law inequalities for triangle (x, y, p).

    Both are nonnegative when the inequalities hold.
    """
    M = manifold
    dxy2 = M.sqdist(x, y)
    base = 0.5 * M.sqdist(p, x) - 0.5 * M.sqdist(p, y)
    mid = M.inner(x, M.log(x, y), M.log(x, p))
    lower = M.delta(D) / 2.0 * dxy2 + base
    upper = M.zeta(D) / 2.0 * dxy2 + base
    return mid - lower, upper - mid


def check_cosine_laws(manifold, x, y, p, D, tol=1e-8):
    """True when both cosine-law inequalities hold for the triangle with slack >= -tol."""
    lo, hi = cosine_law_slacks(manifold, x, y, p, D)
    return lo >= -tol and hi >= -tol


def cosine_law_sweep(manifold, X, Y, P, D=None):
    """Vectorised slacks over many triangles; ``D`` defaults to each triangle's diameter."""
    M = manifold
    dxy = M.dist_batch(X, Y)
    dpx = M.dist_batch(P, X)
    dpy = M.dist_batch(P, Y)
    mid = M.inner_batch(X, M.log_batch(X, Y), M.log_batch(X, P))
    diam = np.maximum(np.maximum(dxy, dpx), dpy) if D is None else np.full(len(X), float(D))
    z = np.array([M.zeta(d) for d in diam])
    dl = np.array([M.delta(d) for d in diam])
    base = 0.5 * dpx**2 - 0.5 * dpy**2
    return mid - (dl / 2 * dxy**2 + base), (z / 2 * dxy**2 + base) - mid
