"""Concrete Hadamard manifolds: Euclidean space, the hyperboloid, products."""
import math

import numpy as np

from . import kernels
from .errors import ConfigError, ConstraintViolation
from .geometry import CurvatureBounds, Manifold


def _arr(x):
    return np.ascontiguousarray(x, dtype=float)


class Euclidean(Manifold):
    name = "euclidean"

    def __init__(self, dim, scale=1.0):
        super().__init__(dim, scale)
        self.ambient_dim = self.dim

    @property
    def curvature(self):
        return CurvatureBounds(0.0, 0.0)

    def inner(self, x, u, v):
        return self.scale**2 * float(np.dot(u, v))

    def norm(self, x, u):
        return self.scale * float(np.linalg.norm(u))

    def dist(self, x, y):
        return self.scale * float(np.linalg.norm(_arr(x) - _arr(y)))

    def exp(self, x, v):
        return _arr(x) + _arr(v)

    def log(self, x, y):
        return _arr(y) - _arr(x)

    def transport(self, y, x, v):
        return _arr(v).copy()

    def proj_tangent(self, x, u):
        return _arr(u).copy()

    def point_residual(self, x):
        x = _arr(x)
        return 0.0 if x.shape == (self.dim,) and np.all(np.isfinite(x)) else math.inf

    def tangent_residual(self, x, v):
        return self.point_residual(v)

    def tangent_basis(self, x):
        return np.eye(self.dim) / self.scale

    def origin(self):
        return np.zeros(self.dim)

    def scaled(self, c):
        return Euclidean(self.dim, self.scale * c)

    def rgrad(self, x, egrad):
        return _arr(egrad) / self.scale**2

    def dist_batch(self, X, Y):
        return self.scale * np.linalg.norm(_arr(X) - _arr(Y), axis=-1)

    def dist_matrix(self, X, P):
        X, P = _arr(X), _arr(P)
        sq = (X**2).sum(1)[:, None] + (P**2).sum(1)[None, :] - 2 * X @ P.T
        return self.scale * np.sqrt(np.maximum(sq, 0.0))

    def exp_batch(self, X, V):
        return _arr(X) + _arr(V)

    def log_batch(self, X, Y):
        return _arr(Y) - _arr(X)

    def inner_batch(self, X, U, V):
        return self.scale**2 * np.sum(_arr(U) * _arr(V), axis=-1)


class Hyperboloid(Manifold):
    """Hyperbolic space of curvature ``-1/scale**2`` in the hyperboloid model.

    Coordinates always live on the unit hyperboloid; the scale only enters the
    metric, so geodesics, exp, log and transport act on ambient vectors exactly
    as in the unit model.
    """

    name = "hyperboloid"

    def __init__(self, dim, scale=1.0):
        super().__init__(dim, scale)
        self.ambient_dim = self.dim + 1
        self._k = kernels.active

    @property
    def curvature(self):
        k = -1.0 / self.scale**2
        return CurvatureBounds(k, k)

    def lorentz(self, u, v):
        return float(self._k.lorentz(_arr(u), _arr(v)))

    def inner(self, x, u, v):
        return self.scale**2 * self.lorentz(u, v)

    def dist(self, x, y):
        d = self._k.dist(_arr(x), _arr(y))
        if d != d:
            raise ConstraintViolation("-<x,y>_L below 1 beyond tolerance; points left the hyperboloid")
        return self.scale * float(d)

    def exp(self, x, v):
        return self._k.exp(_arr(x), _arr(v))

    def log(self, x, y):
        return self._k.log(_arr(x), _arr(y))

    def transport(self, y, x, v):
        return self._k.transport(_arr(y), _arr(x), _arr(v))

    def proj_tangent(self, x, u):
        return kernels.tangent_project(_arr(x), _arr(u))

    def project_point(self, x):
        return kernels.renormalize(x)

    def point_residual(self, x):
        x = _arr(x)
        if x.shape != (self.ambient_dim,) or not np.all(np.isfinite(x)) or x[0] <= 0:
            return math.inf
        return abs(self.lorentz(x, x) + 1.0) / max(1.0, float(x @ x))

    def tangent_residual(self, x, v):
        v = _arr(v)
        if v.shape != (self.ambient_dim,):
            return math.inf
        return abs(self.lorentz(x, v)) / (1.0 + float(np.linalg.norm(v)) * float(np.linalg.norm(x)))

    def boost(self, p):
        """Lorentz isometry sending the origin to ``p`` (its inverse sends p to the origin)."""
        p = _arr(p)
        p0, ps = p[0], p[1:]
        B = np.empty((self.ambient_dim, self.ambient_dim))
        B[0, 0] = p0
        B[0, 1:] = ps
        B[1:, 0] = ps
        B[1:, 1:] = np.eye(self.dim) + np.outer(ps, ps) / (1.0 + p0)
        return B

    def boost_inverse(self, p):
        q = _arr(p).copy()
        q[1:] = -q[1:]
        return self.boost(q)

    def tangent_basis(self, x):
        return self.boost(x)[:, 1:].T / self.scale

    def origin(self):
        o = np.zeros(self.ambient_dim)
        o[0] = 1.0
        return o

    def from_spatial(self, s):
        s = _arr(s)
        return np.concatenate([[math.sqrt(1.0 + s @ s)], s])

    def scaled(self, c):
        return Hyperboloid(self.dim, self.scale * c)

    def rgrad(self, x, egrad):
        g = _arr(egrad).copy()
        g[..., 0] = -g[..., 0]
        return self.proj_tangent(x, g) / self.scale**2

    def _check_batch(self, d):
        if np.isnan(d).any():
            raise ConstraintViolation("-<x,y>_L below 1 beyond tolerance; points left the hyperboloid")
        return d

    def dist_batch(self, X, Y):
        return self.scale * self._check_batch(self._k.dist_rows(_arr(X), _arr(Y)))

    def dist_matrix(self, X, P):
        return self.scale * self._check_batch(self._k.dist_matrix(_arr(X), _arr(P)))

    def exp_batch(self, X, V):
        return self._k.exp_rows(_arr(X), _arr(V))

    def log_batch(self, X, Y):
        return self._k.log_rows(_arr(X), _arr(Y))

    def inner_batch(self, X, U, V):
        return self.scale**2 * kernels.numpy_kernels.lorentz(_arr(U), _arr(V))


class Product(Manifold):
    """Product of two manifolds; points are concatenated ambient coordinates."""

    name = "product"

    def __init__(self, left, right):
        super().__init__(left.dim + right.dim)
        self.left = left
        self.right = right
        self.ambient_dim = left.ambient_dim + right.ambient_dim
        self._cut = left.ambient_dim

    @property
    def curvature(self):
        a, b = self.left.curvature, self.right.curvature
        return CurvatureBounds(min(a.kmin, b.kmin), max(a.kmax, b.kmax))

    def zeta(self, R):
        return max(self.left.zeta(R), self.right.zeta(R))

    def delta(self, R):
        return min(self.left.delta(R), self.right.delta(R))

    def split(self, p):
        p = _arr(p)
        return p[..., : self._cut], p[..., self._cut :]

    def combine(self, a, b):
        return np.concatenate([_arr(a), _arr(b)], axis=-1)

    def _both(self, fn, *args):
        parts = [self.split(a) for a in args]
        return fn(self.left, *[p[0] for p in parts]), fn(self.right, *[p[1] for p in parts])

    def inner(self, x, u, v):
        a, b = self._both(lambda M, x, u, v: M.inner(x, u, v), x, u, v)
        return a + b

    def dist(self, x, y):
        return math.sqrt(self.sqdist(x, y))

    def sqdist(self, x, y):
        a, b = self._both(lambda M, x, y: M.sqdist(x, y), x, y)
        return a + b

    def exp(self, x, v):
        return self.combine(*self._both(lambda M, x, v: M.exp(x, v), x, v))

    def log(self, x, y):
        return self.combine(*self._both(lambda M, x, y: M.log(x, y), x, y))

    def transport(self, y, x, v):
        return self.combine(*self._both(lambda M, y, x, v: M.transport(y, x, v), y, x, v))

    def proj_tangent(self, x, u):
        return self.combine(*self._both(lambda M, x, u: M.proj_tangent(x, u), x, u))

    def point_residual(self, x):
        a, b = self._both(lambda M, x: M.point_residual(x), x)
        return max(a, b)

    def tangent_residual(self, x, v):
        a, b = self._both(lambda M, x, v: M.tangent_residual(x, v), x, v)
        return max(a, b)

    def tangent_basis(self, x):
        xa, xb = self.split(x)
        Ea, Eb = self.left.tangent_basis(xa), self.right.tangent_basis(xb)
        top = np.hstack([Ea, np.zeros((Ea.shape[0], Eb.shape[1]))])
        bottom = np.hstack([np.zeros((Eb.shape[0], Ea.shape[1])), Eb])
        return np.vstack([top, bottom])

    def origin(self):
        return self.combine(self.left.origin(), self.right.origin())

    def scaled(self, c):
        return Product(self.left.scaled(c), self.right.scaled(c))

    def rgrad(self, x, egrad):
        return self.combine(*self._both(lambda M, x, g: M.rgrad(x, g), x, egrad))

    def __repr__(self):
        return f"Product({self.left!r}, {self.right!r})"


def make_manifold(kind, dim, scale=1.0):
    kind = kind.lower()
    if kind in ("euclidean", "flat", "r"):
        return Euclidean(dim, scale)
    if kind in ("hyperboloid", "hyperbolic", "h"):
        return Hyperboloid(dim, scale)
    raise ConfigError(f"unknown manifold {kind!r}", key="problem.manifold")
