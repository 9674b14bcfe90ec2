"""Problem containers: oracle bundles plus declared constants."""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .geometry import GeodesicBall


@dataclass
class GConvexProblem:
    """Minimise a geodesically convex ``f`` over a geodesic ball.

    ``prox``, when given, solves min_y f(y) + d(c, y)**2 / (2 lam) over the
    ball exactly and is called as ``prox(c, lam)``.
    """

    feasible: GeodesicBall
    f: Optional[Callable] = None
    grad: Optional[Callable] = None
    mu: float = 0.0
    L: float = 1.0
    lip: Optional[float] = None
    prox: Optional[Callable] = None
    minimizer: Optional[np.ndarray] = None
    fstar: Optional[float] = None
    name: str = "gconvex"

    def __post_init__(self):
        if self.mu < 0:
            raise ConfigError(f"strong convexity must be >= 0, got {self.mu}", key="mu")
        if self.L < 0:
            raise ConfigError(f"smoothness must be >= 0, got {self.L}", key="L")
        if self.mu > self.L * (1 + 1e-12) and self.L > 0:
            raise ConfigError(f"mu={self.mu} exceeds L={self.L}", key="mu")

    @property
    def manifold(self):
        return self.feasible.manifold

    @property
    def kappa(self):
        return self.L / self.mu


@dataclass
class MinMaxProblem:
    """min over X, max over Y of f(x, y), with declared constants.

    ``grad_y`` is the Riemannian gradient of f in y (an ascent direction).
    Optional ``best_response_x(y)`` / ``best_response_y(x)`` give exact best
    responses, ``f_grid(Xs, Ys)`` evaluates f on all pairs, and ``lip_x`` /
    ``lip_y`` override the Lipschitz bounds of f in each variable.
    """

    X: GeodesicBall
    Y: GeodesicBall
    f: Callable
    grad_x: Callable
    grad_y: Callable
    Lx: float
    Ly: float
    Lxy: float
    mu_x: float
    mu_y: float
    saddle: Optional[tuple] = None
    best_response_x: Optional[Callable] = None
    best_response_y: Optional[Callable] = None
    f_grid: Optional[Callable] = None
    lip_x: Optional[float] = None
    lip_y: Optional[float] = None
    name: str = "minmax"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for k in ("Lx", "Ly", "Lxy", "mu_x", "mu_y"):
            if getattr(self, k) < 0:
                raise ConfigError(f"constant must be nonnegative, got {getattr(self, k)}", key=k)
        if self.mu_x > self.Lx * (1 + 1e-12):
            raise ConfigError(f"mu_x={self.mu_x} exceeds Lx={self.Lx}", key="mu_x")
        if self.mu_y > self.Ly * (1 + 1e-12):
            raise ConfigError(f"mu_y={self.mu_y} exceeds Ly={self.Ly}", key="mu_y")

    @property
    def M(self):
        return self.X.manifold

    @property
    def N(self):
        return self.Y.manifold

    @property
    def D(self):
        return max(self.X.diameter, self.Y.diameter)

    @property
    def kind(self):
        if self.mu_x > 0 and self.mu_y > 0:
            return "SCSC"
        if self.mu_x > 0 or self.mu_y > 0:
            return "SCC"
        return "CC"

    def zeta(self, R):
        return max(self.M.zeta(R), self.N.zeta(R))

    def delta(self, R):
        return min(self.M.delta(R), self.N.delta(R))

    def sqdist(self, a, b):
        return self.M.sqdist(a[0], b[0]) + self.N.sqdist(a[1], b[1])

    def lipschitz_bounds(self):
        """Bounds on the Lipschitz constants of f in x and in y over the feasible set.

        Uses the gradient-norm bounds D(Lx + Lxy) and D(Ly + Lxy) unless the
        problem overrides them.
        """
        lx = self.lip_x if self.lip_x is not None else self.D * (self.Lx + self.Lxy)
        ly = self.lip_y if self.lip_y is not None else self.D * (self.Ly + self.Lxy)
        return lx, ly

    def with_constants(self, **kw):
        return replace(self, **kw)

    def with_uniform_constants(self):
        """Same oracles, constants replaced by L = max(Lx, Ly, Lxy), mu = min(mu_x, mu_y)."""
        L = max(self.Lx, self.Ly, self.Lxy)
        mu = min(self.mu_x, self.mu_y)
        return replace(self, Lx=L, Ly=L, Lxy=L, mu_x=mu, mu_y=mu)

    def x_problem(self, y, **kw):
        """f(., y) as a minimisation problem over X."""
        f, gx = self.f, self.grad_x
        br = self.best_response_x
        opts = dict(
            feasible=self.X,
            f=lambda x: f(x, y),
            grad=lambda x: gx(x, y),
            mu=self.mu_x,
            L=self.Lx,
            lip=self.lip_x,
            minimizer=br(y) if br is not None else None,
            name=f"{self.name}:x",
        )
        opts.update(kw)
        return GConvexProblem(**opts)

    def y_problem(self, x, **kw):
        """-f(x, .) as a minimisation problem over Y."""
        f, gy = self.f, self.grad_y
        br = self.best_response_y
        opts = dict(
            feasible=self.Y,
            f=lambda y: -f(x, y),
            grad=lambda y: -gy(x, y),
            mu=self.mu_y,
            L=self.Ly,
            lip=self.lip_y,
            minimizer=br(x) if br is not None else None,
            name=f"{self.name}:y",
        )
        opts.update(kw)
        return GConvexProblem(**opts)

    def swapped(self):
        """h(x, y) = -f(y, x): exchanges the roles of the two players."""
        f, gx, gy = self.f, self.grad_x, self.grad_y
        bx, by = self.best_response_x, self.best_response_y
        grid = self.f_grid
        return MinMaxProblem(
            X=self.Y,
            Y=self.X,
            f=lambda a, b: -f(b, a),
            grad_x=lambda a, b: -gy(b, a),
            grad_y=lambda a, b: -gx(b, a),
            Lx=self.Ly,
            Ly=self.Lx,
            Lxy=self.Lxy,
            mu_x=self.mu_y,
            mu_y=self.mu_x,
            saddle=None if self.saddle is None else (self.saddle[1], self.saddle[0]),
            best_response_x=None if by is None else (lambda b: by(b)),
            best_response_y=None if bx is None else (lambda a: bx(a)),
            f_grid=None if grid is None else (lambda A, B: -grid(B, A).T),
            lip_x=self.lip_y,
            lip_y=self.lip_x,
            name=f"{self.name}:swapped",
            meta=dict(self.meta),
        )


def rescale_metric(problem):
    """Rescale both metrics so that the declared Lx and Ly coincide.

    X's metric is multiplied by c1^2 = sqrt(Lx/Ly) and Y's by c2^2 = sqrt(Ly/Lx).
    Points keep their coordinates; distances scale by c, gradients by 1/c^2,
    and Lx, mu_x (resp. Ly, mu_y) by 1/c1^2 (resp. 1/c2^2). Since c1 c2 = 1 the
    coupling constant Lxy is unchanged. Returns ``(rescaled, (c1sq, c2sq))``.
    """
    if problem.Lx <= 0 or problem.Ly <= 0:
        raise ConfigError("rescaling needs Lx > 0 and Ly > 0", key="Lx" if problem.Lx <= 0 else "Ly")
    if problem.Lx == problem.Ly:
        return problem, (1.0, 1.0)
    c1sq = (problem.Lx / problem.Ly) ** 0.5
    c2sq = 1.0 / c1sq
    c1, c2 = c1sq**0.5, c2sq**0.5
    X = GeodesicBall(problem.M.scaled(c1), problem.X.center, problem.X.radius * c1)
    Y = GeodesicBall(problem.N.scaled(c2), problem.Y.center, problem.Y.radius * c2)
    gx, gy = problem.grad_x, problem.grad_y
    out = replace(
        problem,
        X=X,
        Y=Y,
        grad_x=lambda x, y: gx(x, y) / c1sq,
        grad_y=lambda x, y: gy(x, y) / c2sq,
        Lx=problem.Lx / c1sq,
        Ly=problem.Ly / c2sq,
        mu_x=problem.mu_x / c1sq,
        mu_y=problem.mu_y / c2sq,
        lip_x=None if problem.lip_x is None else problem.lip_x / c1,
        lip_y=None if problem.lip_y is None else problem.lip_y / c2,
        name=f"{problem.name}:rescaled",
        meta=dict(problem.meta),
    )
    return out, (c1sq, c2sq)
