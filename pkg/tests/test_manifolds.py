import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riemmax import kernels
from riemmax.errors import ConfigError, ConstraintViolation, DomainError
from riemmax.manifolds import Euclidean, Hyperboloid, Product, make_manifold
from riemmax.problem import rescale_metric
from riemmax.problems import quadratic_saddle

# arclength found by shooting the geodesic ODE (tests/oracles/derive_values.py)
SHOT_DISTANCE = 1.9999999999969385

coords = st.floats(-3.0, 3.0, allow_nan=False)


def test_distance_to_self_is_zero(rng):
    H = Hyperboloid(3)
    x = H.random_point(rng, radius=3.0)
    assert H.dist(x, x) == 0.0


def test_distance_matches_shooting_oracle():
    H = Hyperboloid(2)
    y = np.array([math.cosh(2.0), math.sinh(2.0), 0.0])
    assert abs(H.dist(H.origin(), y) - SHOT_DISTANCE) <= 1e-10


def test_distance_symmetric_1000_pairs(rng):
    H = Hyperboloid(2)
    X = np.array([H.random_point(rng, radius=3.0) for _ in range(1000)])
    Y = np.array([H.random_point(rng, radius=3.0) for _ in range(1000)])
    assert np.max(np.abs(H.dist_batch(X, Y) - H.dist_batch(Y, X))) <= 1e-10


@given(coords, coords, coords, coords, coords, coords)
def test_triangle_inequality(a, b, c, d, e, f):
    H = Hyperboloid(2)
    x, y, z = H.from_spatial([a, b]), H.from_spatial([c, d]), H.from_spatial([e, f])
    assert H.dist(x, z) <= H.dist(x, y) + H.dist(y, z) + 1e-9


def test_off_surface_points_raise():
    H = Hyperboloid(2)
    x = H.origin()
    bad = np.array([0.5, 0.0, 0.0])
    with pytest.raises(ConstraintViolation):
        H.dist(x, bad)
    with pytest.raises(ConstraintViolation):
        H.check_point(np.array([1.0, 0.1, 0.0]))


def test_tiny_clamp_is_tolerated():
    H = Hyperboloid(2)
    x = H.origin()
    y = x.copy()
    y[0] -= 1e-12
    assert H.dist(x, y) == pytest.approx(0.0, abs=1e-5)


def test_scaled_model_curvature_and_distance(rng):
    H, H2 = Hyperboloid(2), Hyperboloid(2, 0.5)
    x, y = H.random_point(rng), H.random_point(rng)
    assert H2.dist(x, y) == pytest.approx(0.5 * H.dist(x, y), rel=1e-14)
    assert H2.kmin == pytest.approx(-4.0)
    # log is a geometric object: the exp/log pair is shared, norms scale
    v = H2.log(x, y)
    assert H2.norm(x, v) == pytest.approx(H2.dist(x, y), rel=1e-12)


def test_tangent_basis_orthonormal(rng):
    for M in (Hyperboloid(3), Hyperboloid(2, 1.7), Euclidean(3, 0.5)):
        x = M.random_point(rng, radius=2.0)
        E = M.tangent_basis(x)
        G = np.array([[M.inner(x, a, b) for b in E] for a in E])
        assert np.allclose(G, np.eye(M.dim), atol=1e-12)


def test_boost_maps_origin(rng):
    H = Hyperboloid(3)
    p = H.random_point(rng, radius=2.0)
    assert np.allclose(H.boost(p) @ H.origin(), p)
    assert np.allclose(H.boost_inverse(p) @ p, H.origin(), atol=1e-12)


def test_gauss_curvature_from_angle_defect(rng):
    """Angle defect over area of small geodesic triangles estimates K = -1."""
    H = Hyperboloid(3)
    nodes, weights = np.polynomial.legendre.leggauss(24)
    s_nodes, s_w = 0.5 * (nodes + 1), 0.5 * weights

    def area(A, B, C):
        # fan of geodesics from A to the side BC; integrate the area element numerically
        total = 0.0
        h = 1e-6
        w_bc = H.log(B, C)
        for t, wt in zip(s_nodes, s_w):
            for s, ws in zip(s_nodes, s_w):
                def point(s, t):
                    q = H.exp(B, t * w_bc)
                    return H.exp(A, s * H.log(A, q))

                ds = (point(s + h, t) - point(s - h, t)) / (2 * h)
                dt = (point(s, t + h) - point(s, t - h)) / (2 * h)
                x = point(s, t)
                gss, gtt, gst = H.inner(x, ds, ds), H.inner(x, dt, dt), H.inner(x, ds, dt)
                total += wt * ws * math.sqrt(max(gss * gtt - gst * gst, 0.0))
        return total

    def angle(P, Q, R):
        u, v = H.log(P, Q), H.log(P, R)
        return math.acos(H.inner(P, u, v) / (H.norm(P, u) * H.norm(P, v)))

    for _ in range(3):
        A = H.random_point(rng, radius=1.0)
        B = H.exp(A, H.random_tangent(rng, A, norm=0.4))
        C = H.exp(A, H.random_tangent(rng, A, norm=0.4))
        defect = math.pi - (angle(A, B, C) + angle(B, C, A) + angle(C, A, B))
        K = -defect / area(A, B, C)
        assert abs(K + 1.0) <= 1e-4


def test_euclidean_model_is_flat(rng):
    E = Euclidean(3)
    x, v = rng.standard_normal(3), rng.standard_normal(3)
    assert np.allclose(E.exp(x, v), x + v)
    assert np.allclose(E.transport(x, v, v), v)
    assert E.zeta(10.0) == 1.0 and E.delta(10.0) == 1.0


def test_product_distance_is_exact(rng):
    P = Product(Hyperboloid(2), Euclidean(2))
    a = P.combine(Hyperboloid(2).random_point(rng), rng.standard_normal(2))
    b = P.combine(Hyperboloid(2).random_point(rng), rng.standard_normal(2))
    xa, ya = P.split(a)
    xb, yb = P.split(b)
    expected = Hyperboloid(2).sqdist(xa, xb) + Euclidean(2).sqdist(ya, yb)
    assert P.sqdist(a, b) == expected
    assert np.allclose(P.exp(a, P.log(a, b)), b, atol=1e-10)
    assert P.curvature.kmin == -1.0 and P.curvature.kmax == 0.0


def test_make_manifold():
    assert isinstance(make_manifold("hyperbolic", 2), Hyperboloid)
    assert isinstance(make_manifold("Euclidean", 2), Euclidean)
    with pytest.raises(ConfigError):
        make_manifold("sphere", 2)
    with pytest.raises(DomainError):
        Euclidean(0)


# -- metric rescaling -----------------------------------------------------------


def test_rescale_identity_when_balanced():
    P = quadratic_saddle([2.0, 3.0], [1.0, 3.0], np.eye(2) * 0.5)
    out, scales = rescale_metric(P)
    assert out is P and scales == (1.0, 1.0)


def test_rescale_example_values():
    P = quadratic_saddle([1.0, 4.0], [0.5, 1.0], [[0.3, 0.0], [0.0, 0.2]])
    out, (c1sq, c2sq) = rescale_metric(P)
    assert (out.Lx, out.Ly) == pytest.approx((2.0, 2.0))
    assert (c1sq, c2sq) == pytest.approx((2.0, 0.5))
    assert out.Lxy == P.Lxy
    assert out.Lx / out.mu_x == pytest.approx(P.Lx / P.mu_x)
    assert out.Ly / out.mu_y == pytest.approx(P.Ly / P.mu_y)
    assert out.mu_x * out.mu_y == pytest.approx(P.mu_x * P.mu_y)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.0, 1.0))
def test_rescale_preserves_condition_numbers(Lx, Ly, frac):
    P = quadratic_saddle([Lx * 0.2, Lx], [Ly * 0.5, Ly], np.eye(2) * 0.1)
    out, (c1sq, c2sq) = rescale_metric(P)
    assert out.Lx == pytest.approx(out.Ly, rel=1e-12)
    assert out.Lx == pytest.approx(math.sqrt(Lx * Ly), rel=1e-12)
    assert out.Lx / out.mu_x == pytest.approx(P.Lx / P.mu_x, rel=1e-12)
    x = np.array([frac, -frac]) * 0.5
    # distances scale by c1 and gradient norms by 1/c1
    assert out.M.dist(x, np.zeros(2)) == pytest.approx(math.sqrt(c1sq) * P.M.dist(x, np.zeros(2)), abs=1e-14)
    y = np.zeros(2)
    g0, g1 = P.grad_x(x, y), out.grad_x(x, y)
    assert out.M.norm(x, g1) == pytest.approx(P.M.norm(x, g0) / math.sqrt(c1sq), abs=1e-14)


def test_rescale_rejects_zero_smoothness():
    P = quadratic_saddle([1.0], [1.0], [[0.1]])
    with pytest.raises(ConfigError):
        rescale_metric(P.with_constants(Lx=0.0, mu_x=0.0))


# -- numba and numpy kernels ------------------------------------------------------


def _cloud(rng, n, dim):
    s = rng.standard_normal((n, dim))
    return np.concatenate([np.sqrt(1 + np.sum(s * s, 1))[:, None], s], axis=1)


@pytest.mark.parametrize("dim", [1, 2, 5])
def test_backends_agree(rng, dim):
    nb, npk = kernels.numba_kernels, kernels.numpy_kernels
    X, Y = _cloud(rng, 500, dim), _cloud(rng, 500, dim)
    V = kernels.tangent_project(X, rng.standard_normal(X.shape))
    pairs = [
        (nb.dist_rows(X, Y), npk.dist_rows(X, Y)),
        (nb.exp_rows(X, V), npk.exp_rows(X, V)),
        (nb.log_rows(X, Y), npk.log_rows(X, Y)),
        (nb.transport_rows(Y, X, V), npk.transport_rows(Y, X, V)),
        (nb.dist_matrix(X[:20], Y[:30]), npk.dist_matrix(X[:20], Y[:30])),
        (nb.exp(X[0], V[0]), npk.exp(X[0], V[0])),
        (nb.log(X[0], Y[0]), npk.log(X[0], Y[0])),
    ]
    for a, b in pairs:
        assert np.max(np.abs(a - b) / (1 + np.abs(b))) <= 1e-12


@pytest.mark.parametrize("flag, expected", [("1", "numpy"), ("0", "numba")])
def test_disable_flag_selects_backend(flag, expected):
    env = dict(os.environ, RIEMMAX_DISABLE_NUMBA=flag)
    code = "from riemmax.kernels import BACKEND; print(BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def test_numpy_path_solves_identically():
    code = (
        "import json\n"
        "import numpy as np\n"
        "from riemmax.problems import random_karcher\n"
        "from riemmax.gconvex import prgd\n"
        "K = random_karcher(np.random.default_rng(0), dim=2, m=4)\n"
        "x, _ = prgd(K, K.feasible.center, eps=1e-10)\n"
        "print(json.dumps(x.tolist()))\n"
    )
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, RIEMMAX_DISABLE_NUMBA=flag)
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs.append(np.array(json.loads(r.stdout)))
    assert np.allclose(outs[0], outs[1], atol=1e-9)
