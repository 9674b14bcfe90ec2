"""Runtime property checks behind ``riemmax check``.

Each check returns a measured slack: nonnegative means the property holds,
and the magnitude says by how much. The sizes are chosen so the full suite
runs in well under a minute.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import minmax as mm
from .gconvex import prgd, riemacon_abs
from .geometry import cosine_law_sweep, delta, zeta
from .manifolds import Euclidean, Hyperboloid
from .problems import (
    bilinear_problem,
    brute_force_best_response,
    coupled_quadratic,
    diagonal_quadratic,
    directional_curvature,
    finite_diff_gradient_check,
    hyperbolic_line_cc,
    measure_constants,
    minmax_gradient_check,
    random_karcher,
    random_robust_karcher,
    sion_check,
    synthetic_saddle,
)
from .trace import RunTrace

GRAD_TOL = 1e-5


@dataclass
class Check:
    name: str
    slack: float
    detail: str = ""

    @property
    def ok(self):
        return self.slack >= 0 and math.isfinite(self.slack)


@dataclass
class Report:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def add(self, name, slack, detail=""):
        self.checks.append(Check(name, float(slack), detail))

    def render(self):
        lines = [f"{'PASS' if c.ok else 'FAIL'} {c.name:40s} slack={c.slack:+.3e} {c.detail}" for c in self.checks]
        n_bad = sum(not c.ok for c in self.checks)
        lines.append(f"{len(self.checks) - n_bad}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def hyperbolic_cloud(rng, H, n, spread):
    """n points whose spatial coordinates are Gaussian with scale ``spread``."""
    s = spread * rng.standard_normal((n, H.dim))
    return np.concatenate([np.sqrt(1.0 + np.sum(s * s, axis=1))[:, None], s], axis=1)


def _corrupt(grad, factor=1.1):
    def bad(x, *a):
        g = np.array(grad(x, *a), dtype=float)
        g[-1] *= factor
        return g

    return bad


# -- geometry -------------------------------------------------------------------


def check_geometry(report, rng, triangles=10_000):
    for M in (Hyperboloid(3), Hyperboloid(2, 0.7), Euclidean(3)):
        o = M.origin()
        err_rt = err_iso = 0.0
        for _ in range(200):
            x = M.random_point(rng, o, 2.0)
            v = M.random_tangent(rng, x, norm=rng.uniform(0, 3))
            err_rt = max(err_rt, M.norm(x, M.log(x, M.exp(x, v)) - v))
            y = M.random_point(rng, o, 2.0)
            u = M.random_tangent(rng, y)
            err_iso = max(err_iso, abs(M.norm(x, M.transport(y, x, u)) - M.norm(y, u)))
        report.add(f"exp/log round trip {M!r}", 1e-8 - err_rt, f"max err {err_rt:.2e}")
        report.add(f"transport isometry {M!r}", 1e-8 - err_iso, f"max err {err_iso:.2e}")
    e_z = abs(zeta(1.0, -1.0) - 1.0 / math.tanh(1.0))
    e_d = abs(delta(math.pi / 4, 1.0) - (math.pi / 4) / math.tan(math.pi / 4))
    report.add("curvature constants spot values", 1e-9 - max(e_z, e_d))
    H = Hyperboloid(2)
    X, Y, P = (hyperbolic_cloud(rng, H, triangles, 1.0) for _ in range(3))
    lo, hi = cosine_law_sweep(H, X, Y, P)
    worst = min(lo.min(), hi.min())
    report.add(f"cosine laws on {triangles} triangles", worst + 1e-8, f"min slack {worst:.2e}")
    # second derivative of d^2/2 between delta_R and zeta_R
    p = H.origin()
    viol = math.inf
    for _ in range(200):
        x = H.random_point(rng, p, 2.0)
        e = H.random_tangent(rng, x, norm=1.0)
        d = H.dist(x, p)
        c = directional_curvature(lambda z: -H.log(z, p), H, x, e, 1e-5)
        viol = min(viol, c - H.delta(d) + 1e-5, H.zeta(d) - c + 1e-5)
    report.add("Hessian of d^2/2 within [delta, zeta]", viol)


# -- oracles ----------------------------------------------------------------------


def check_oracles(report, rng, inject_fault=False):
    K = random_karcher(rng, dim=2, m=4)
    grad = _corrupt(lambda x: K.grad(x)) if inject_fault else K.grad
    err = max(finite_diff_gradient_check(K.f, grad, K.manifold, K.feasible.sample(rng), rng=rng) for _ in range(5))
    report.add("karcher gradient vs finite differences", GRAD_TOL - err, f"max err {err:.2e}")
    S = synthetic_saddle(rng, samples=150)
    if inject_fault:
        S = S.with_constants(grad_x=_corrupt(S.grad_x))
    err = max(minmax_gradient_check(S, S.X.sample(rng), S.Y.sample(rng), rng=rng) for _ in range(5))
    report.add("synthetic saddle gradients", GRAD_TOL - err, f"max err {err:.2e}")
    R = random_robust_karcher(rng)
    err = max(minmax_gradient_check(R, R.X.sample(rng), R.Y.sample(rng), rng=rng) for _ in range(5))
    report.add("robust karcher gradients", GRAD_TOL - err, f"max err {err:.2e}")
    m = measure_constants(R, rng, samples=150)
    slack = min(m["mu_x"] - 0.95 * R.mu_x, 1.05 * R.Lx - m["Lx"])
    report.add("robust karcher declared constants", slack, f"measured mu_x={m['mu_x']:.3f} Lx={m['Lx']:.3f}")
    x = R.X.sample(rng)
    (_, v_solve) = brute_force_best_response(R, x, which="y", mode="solve")
    (_, v_grid) = brute_force_best_response(R, x, which="y", mode="grid", per_axis=61)
    _, ly = R.lipschitz_bounds()
    tol = ly * 2.0 * R.Y.radius / 60 + 1e-9
    report.add("best response grid vs solve", tol - (v_solve - v_grid), f"diff {v_solve - v_grid:.2e}")


# -- solvers ----------------------------------------------------------------------


def check_solvers(report, rng):
    worst = math.inf
    for _ in range(3):
        K = random_karcher(rng, dim=2, m=4)
        _, tr = prgd(K, K.feasible.sample(rng), eps=1e-8)
        gaps, radii = tr.column("gap_upper"), tr.extras["step_radius"]
        for t in range(len(gaps) - 1):
            if gaps[t] > 1e-13:
                bound = 1 - K.mu / (4 * K.L * K.manifold.zeta(radii[t])) + 1e-8
                worst = min(worst, bound - gaps[t + 1] / gaps[t])
    report.add("prgd per-step contraction", worst)
    Q = diagonal_quadratic([1.0, 16.0], [0.3, -0.2], 1.0)
    _, tr = riemacon_abs(Q, np.array([0.5, 0.5]), 1.0 / Q.L, eps=1e-8)
    slack = min(Q.feasible.diameter - z for z in tr.extras["zbar_norm"])
    report.add("accelerated prox dual norm bound", slack)
    S = synthetic_saddle(rng, samples=150).with_uniform_constants()
    start = (S.X.sample(rng), S.Y.sample(rng))
    _, tr = mm.rceg(S, start, T=100)
    d0 = tr.extras["primary"][0]
    slack = min(min(d0 - p for p in tr.extras["primary"][1:]), min(4 * d0 - s for s in tr.extras["secondary"]))
    report.add("extragradient stays in ball", slack)
    C = coupled_quadratic(1.0, 1.0, 0.3, dim=2)
    _, tr = mm.rabr(C, (np.full(2, 0.6), np.full(2, -0.6)), T=6)
    ly = tr.extras["lyapunov"]
    ratios = [b / a for a, b in zip(ly, ly[1:]) if a > 1e-24]
    report.add("alternating best response contraction", 0.62 - max(ratios), f"max ratio {max(ratios):.3f}")
    # gap toolkit: one-sided gaps control distances
    worst = math.inf
    xs, ys = C.saddle
    for _ in range(100):
        x, y = C.X.sample(rng), C.Y.sample(rng)
        g = mm.certified_gap(C, x, y)
        dist_x = mm.one_gap_to_one_dist(g.gap_x, C.mu_x)
        worst = min(worst, dist_x - C.M.sqdist(x, xs) + 1e-8, g.gap - max(g.gap_x, g.gap_y) + 1e-8)
    report.add("gap/distance conversions", worst)
    B = bilinear_problem([[1.0, 0.4], [-0.2, 0.7]], radius=1.0)
    s = sion_check(B, 21, 21)
    report.add("minimax equality on a grid", s["bound"] - s["diff"], f"diff {s['diff']:.2e}")
    Hc = hyperbolic_line_cc(0.5, 1.0, 0.3, anchor=0.2)
    s = sion_check(Hc, 41, 41)
    report.add("minimax equality on H1 x R", s["bound"] - s["diff"], f"diff {s['diff']:.2e}")
    R = random_robust_karcher(rng)
    worst = math.inf
    for _ in range(100):
        x, z = R.X.sample(rng), R.X.sample(rng)
        d = R.N.dist(R.best_response_y(x), R.best_response_y(z))
        worst = min(worst, R.Lxy / R.mu_y * R.M.dist(x, z) + 1e-6 - d)
    report.add("best responses are Lipschitz", worst)
    tr = RunTrace()
    for t in range(5):
        tr.log(t, value=1.0 / (t + 1), gap_upper=math.exp(-t), dist_sq=math.nan)
    same = RunTrace.from_csv(tr.to_csv()).to_csv() == tr.to_csv()
    report.add("trace CSV round trip", 0.0 if same else -1.0)


def validate_suite(scope="all", inject_fault=False, seed=0):
    """Run the checks for ``scope`` (geometry, solvers or all) and return a Report."""
    if scope not in ("geometry", "solvers", "all"):
        raise ValueError(f"unknown scope {scope!r}")
    rng = np.random.default_rng(seed)
    report = Report()
    if scope in ("geometry", "all"):
        check_geometry(report, rng)
    check_oracles(report, rng, inject_fault=inject_fault)
    if scope in ("solvers", "all"):
        check_solvers(report, rng)
    return report
