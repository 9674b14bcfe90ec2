"""Hot kernels for the unit hyperboloid.

Points live on {z : <z,z>_L = -1, z[0] > 0} with the Lorentz form
<u,v>_L = -u[0]v[0] + sum_i u[i]v[i]. Every kernel exists twice: a loop
version compiled with numba and a vectorised numpy version. The names exported
at module level point at one of the two, chosen by ``riemmax._accel``.

A distance kernel returns NaN when -<x,y>_L falls below 1 by more than
``CLAMP_TOL``; callers turn that into a ConstraintViolation.
"""
import math
from types import SimpleNamespace

import numpy as np

from ._accel import USE_NUMBA, njit

CLAMP_TOL = 1e-9
SMALL_DIST = 1e-7
SMALL_NORM = 1e-8


# -- numpy path -------------------------------------------------------------


def _np_lorentz(u, v):
    return np.sum(u[..., 1:] * v[..., 1:], axis=-1) - u[..., 0] * v[..., 0]


def _np_dist(x, y):
    a = -_np_lorentz(x, y)
    diff = x - y
    q = np.maximum(_np_lorentz(diff, diff), 0.0)
    d = 2.0 * np.arcsinh(np.sqrt(q) / 2.0)
    return np.where(a < 1.0 - CLAMP_TOL, np.nan, d)


def _np_renorm(z):
    z = np.array(z, dtype=float, copy=True)
    z[..., 0] = np.sqrt(1.0 + np.sum(z[..., 1:] ** 2, axis=-1))
    return z


def _np_tangent(x, u):
    return u + _np_lorentz(x, u)[..., None] * x


def _np_exp(x, v):
    n2 = np.maximum(_np_lorentz(v, v), 0.0)
    nv = np.sqrt(n2)
    small = nv < SMALL_NORM
    safe = np.where(small, 1.0, nv)
    c = np.where(small, 1.0 + n2 / 2.0, np.cosh(safe))
    s = np.where(small, 1.0 + n2 / 6.0, np.sinh(safe) / safe)
    return _np_renorm(c[..., None] * x + s[..., None] * v)


def _np_log(x, y):
    diff = y - x
    q = np.maximum(_np_lorentz(diff, diff), 0.0)
    d = 2.0 * np.arcsinh(np.sqrt(q) / 2.0)
    u = diff - (q / 2.0)[..., None] * x
    small = d < SMALL_DIST
    safe = np.where(small, 1.0, d)
    coef = np.where(small, 1.0 - d * d / 6.0, safe / np.sinh(safe))
    return _np_tangent(x, coef[..., None] * u)


def _np_transport(y, x, v):
    num = _np_lorentz(x, v)
    den = 1.0 - _np_lorentz(x, y)
    w = v + (num / den)[..., None] * (x + y)
    return _np_tangent(x, w)


def _np_dist_matrix(X, P):
    # X: (N, n+1), P: (M, n+1)
    gram = X[:, 1:] @ P[:, 1:].T - np.outer(X[:, 0], P[:, 0])
    a = -gram
    q = np.maximum(2.0 * (a - 1.0), 0.0)
    d = 2.0 * np.arcsinh(np.sqrt(q) / 2.0)
    return np.where(a < 1.0 - CLAMP_TOL, np.nan, d)


numpy_kernels = SimpleNamespace(
    lorentz=_np_lorentz,
    dist=_np_dist,
    exp=_np_exp,
    log=_np_log,
    transport=_np_transport,
    dist_rows=_np_dist,
    exp_rows=_np_exp,
    log_rows=_np_log,
    transport_rows=_np_transport,
    dist_matrix=_np_dist_matrix,
)


# -- numba path -------------------------------------------------------------


@njit
def _nb_lorentz(u, v):
    s = -u[0] * v[0]
    for i in range(1, u.shape[0]):
        s += u[i] * v[i]
    return s


@njit
def _nb_dist(x, y):
    a = -_nb_lorentz(x, y)
    if a < 1.0 - CLAMP_TOL:
        return np.nan
    q = -(x[0] - y[0]) ** 2
    for i in range(1, x.shape[0]):
        q += (x[i] - y[i]) ** 2
    if q < 0.0:
        q = 0.0
    return 2.0 * math.asinh(math.sqrt(q) / 2.0)


@njit
def _nb_exp_into(x, v, out):
    n2 = _nb_lorentz(v, v)
    if n2 < 0.0:
        n2 = 0.0
    nv = math.sqrt(n2)
    if nv < SMALL_NORM:
        c = 1.0 + n2 / 2.0
        s = 1.0 + n2 / 6.0
    else:
        c = math.cosh(nv)
        s = math.sinh(nv) / nv
    acc = 1.0
    for i in range(1, x.shape[0]):
        out[i] = c * x[i] + s * v[i]
        acc += out[i] * out[i]
    out[0] = math.sqrt(acc)


@njit
def _nb_exp(x, v):
    out = np.empty_like(x)
    _nb_exp_into(x, v, out)
    return out


@njit
def _nb_log_into(x, y, out):
    n = x.shape[0]
    q = -(y[0] - x[0]) ** 2
    for i in range(1, n):
        q += (y[i] - x[i]) ** 2
    if q < 0.0:
        q = 0.0
    d = 2.0 * math.asinh(math.sqrt(q) / 2.0)
    if d < SMALL_DIST:
        coef = 1.0 - d * d / 6.0
    else:
        coef = d / math.sinh(d)
    half = q / 2.0
    for i in range(n):
        out[i] = coef * ((y[i] - x[i]) - half * x[i])
    t = _nb_lorentz(x, out)
    for i in range(n):
        out[i] += t * x[i]


@njit
def _nb_log(x, y):
    out = np.empty_like(x)
    _nb_log_into(x, y, out)
    return out


@njit
def _nb_transport_into(y, x, v, out):
    n = x.shape[0]
    coef = _nb_lorentz(x, v) / (1.0 - _nb_lorentz(x, y))
    for i in range(n):
        out[i] = v[i] + coef * (x[i] + y[i])
    t = _nb_lorentz(x, out)
    for i in range(n):
        out[i] += t * x[i]


@njit
def _nb_transport(y, x, v):
    out = np.empty_like(x)
    _nb_transport_into(y, x, v, out)
    return out


@njit
def _nb_lorentz_rows(U, V):
    out = np.empty(U.shape[0])
    for k in range(U.shape[0]):
        out[k] = _nb_lorentz(U[k], V[k])
    return out


@njit
def _nb_dist_rows(X, Y):
    out = np.empty(X.shape[0])
    for k in range(X.shape[0]):
        out[k] = _nb_dist(X[k], Y[k])
    return out


@njit
def _nb_exp_rows(X, V):
    out = np.empty_like(X)
    for k in range(X.shape[0]):
        _nb_exp_into(X[k], V[k], out[k])
    return out


@njit
def _nb_log_rows(X, Y):
    out = np.empty_like(X)
    for k in range(X.shape[0]):
        _nb_log_into(X[k], Y[k], out[k])
    return out


@njit
def _nb_transport_rows(Y, X, V):
    out = np.empty_like(X)
    for k in range(X.shape[0]):
        _nb_transport_into(Y[k], X[k], V[k], out[k])
    return out


@njit
def _nb_dist_matrix(X, P):
    out = np.empty((X.shape[0], P.shape[0]))
    for i in range(X.shape[0]):
        for j in range(P.shape[0]):
            out[i, j] = _nb_dist(X[i], P[j])
    return out


def _nb_lorentz_any(u, v):
    if u.ndim == 1:
        return _nb_lorentz(u, v)
    return _nb_lorentz_rows(u, v)


def _rowwise(single, rows):
    def call(*args):
        if args[0].ndim == 1:
            return single(*args)
        return rows(*args)

    call.__name__ = rows.__name__
    return call


numba_kernels = SimpleNamespace(
    lorentz=_nb_lorentz_any,
    dist=_rowwise(_nb_dist, _nb_dist_rows),
    exp=_rowwise(_nb_exp, _nb_exp_rows),
    log=_rowwise(_nb_log, _nb_log_rows),
    transport=_rowwise(_nb_transport, _nb_transport_rows),
    dist_rows=_nb_dist_rows,
    exp_rows=_nb_exp_rows,
    log_rows=_nb_log_rows,
    transport_rows=_nb_transport_rows,
    dist_matrix=_nb_dist_matrix,
)

active = numba_kernels if USE_NUMBA else numpy_kernels
BACKEND = "numba" if USE_NUMBA else "numpy"


def renormalize(z):
    """Recompute the time coordinate so that z sits exactly on the hyperboloid."""
    return _np_renorm(z)


def tangent_project(x, u):
    """Orthogonal projection of an ambient vector onto the tangent space at x."""
    return _np_tangent(x, u)
