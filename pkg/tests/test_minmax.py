import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from riemmax.errors import ConfigError, DomainError, PreconditionError, UnsupportedStructureError
from riemmax.minmax import (
    RammaSchedule,
    SaddleCertificate,
    certified_gap,
    curvature_xi,
    dist_repair_bound,
    dist_to_gap,
    full_gap_to_one_gap,
    one_gap_to_dist_repair,
    one_gap_to_one_dist,
    pair_gap_certificate,
    rabr,
    rabr_budgets,
    ramma,
    rceg,
    rceg_step_size,
    reduce_to_scsc,
    solve_regularized,
)
from riemmax.problems import (
    bilinear_problem,
    brute_force_best_response,
    coupled_quadratic,
    quadratic_saddle,
    random_robust_karcher,
    synthetic_saddle,
)


def euclid_recursion_xy(x, y, eta, T):
    """Extragradient on f(x, y) = xy written out by hand."""
    xs = []
    for _ in range(T):
        w, z = x - eta * y, y + eta * x
        x, y = x - eta * z, y + eta * w
        xs.append((w, z, x, y))
    return xs


# -- extragradient --------------------------------------------------------------


def test_step_size_values():
    assert rceg_step_size("SCSC", 1.0, 0.1, 1.0, 1.0) == pytest.approx(math.sqrt(1 / 8), rel=1e-15)
    assert rceg_step_size("SCSC", 1.0, 10.0, 1.0, 1.0) == pytest.approx(0.05)
    assert rceg_step_size("CC", 1.0, 0.0, 1.0, 1.0) == 0.5
    with pytest.raises(ConfigError):
        rceg_step_size("SC", 1.0, 0.1, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        rceg_step_size("CC", 0.0, 0.0, 1.0, 1.0)


def test_bilinear_cc_matches_hand_recursion():
    P = bilinear_problem([[1.0]], radius=2.0)
    start = (np.array([1.0]), np.array([0.5]))
    (xa, ya), tr = rceg(P, start, mode="CC", T=200)
    assert tr.extras["eta"] == 0.5
    hand = euclid_recursion_xy(1.0, 0.5, 0.5, 200)
    D2 = 1.25
    for w, z, x, y in hand:
        assert x * x + y * y <= D2 + 1e-12
        assert w * w + z * z <= 4 * D2 + 1e-12
    # flat geodesic averaging is the arithmetic mean of w_1..w_{T-1}
    w_mean = np.mean([h[0] for h in hand[1:]])
    assert xa[0] == pytest.approx(w_mean, abs=1e-12)
    assert abs(xa[0]) + abs(ya[0]) < 0.05
    assert tr.extras["average"][-1] < tr.extras["average"][10]


def test_rceg_fixed_point_at_saddle():
    P = coupled_quadratic(1.0, 1.0, 1.0, dim=2).with_uniform_constants()
    start = P.saddle
    (x, y), tr = rceg(P, start, T=10, dist_bound=0.1)
    assert np.array_equal(x, start[0]) and np.array_equal(y, start[1])
    assert max(tr.extras["primary"]) == 0.0


def test_rceg_stay_in_ball_hyperbolic(rng):
    P = synthetic_saddle(rng, coupling=0.3).with_uniform_constants()
    start = (P.X.sample(rng), P.Y.sample(rng))
    _, tr = rceg(P, start, T=80)
    D2 = P.sqdist(start, P.saddle)
    assert max(tr.extras["primary"]) <= D2 + 1e-12
    assert max(tr.extras["secondary"][1:]) <= 4 * D2 + 1e-12


def test_rceg_scsc_contraction_hyperbolic(rng):
    P = synthetic_saddle(rng, coupling=0.3).with_uniform_constants()
    start = (P.X.sample(rng), P.Y.sample(rng))
    _, tr = rceg(P, start, T=60)
    eta = tr.extras["eta"]
    rate = 1 - P.mu_x * eta / 2
    d = tr.extras["primary"]
    for a, b in zip(d, d[1:]):
        if a > 1e-20:
            assert b / a <= rate + 1e-8


def test_rceg_rejects_unequal_constants(rng):
    P = coupled_quadratic(1.0, 2.0, 0.1)
    with pytest.raises(UnsupportedStructureError, match="rescale|ramma"):
        rceg(P, P.saddle, mode="SCSC", T=1)
    Q = quadratic_saddle([1.0], [1.0], [[0.1]]).with_constants(Lx=2.0)
    with pytest.raises(UnsupportedStructureError):
        rceg(Q, Q.saddle, mode="SCSC", T=1)
    B = bilinear_problem([[1.0]]).with_constants(saddle=None)
    with pytest.raises(PreconditionError):
        rceg(B, (np.zeros(1), np.zeros(1)), T=1)
    with pytest.raises(PreconditionError):
        rceg(bilinear_problem([[1.0]]), (np.ones(1) * 0.5, np.zeros(1)))


def test_rceg_eps_sets_budget():
    P = coupled_quadratic(1.0, 1.0, 1.0).with_uniform_constants()
    start = (np.array([0.6]), np.array([-0.4]))
    (x, y), _ = rceg(P, start, eps=1e-10)
    assert x[0] ** 2 + y[0] ** 2 <= 1e-10


# -- alternating best response -------------------------------------------------


def test_rabr_decoupled_single_iteration():
    P = quadratic_saddle([1.0, 3.0], [2.0, 5.0], np.zeros((2, 2)))
    start = (np.array([0.5, -0.5]), np.array([0.3, 0.6]))
    (x, y), tr = rabr(P, start, eps=1e-10)
    assert len(tr) == 2
    assert P.sqdist((x, y), P.saddle) <= 1e-10


@pytest.mark.parametrize("mu_x, mu_y, c", [(1.0, 1.0, 0.4), (2.0, 0.5, 0.45), (0.5, 3.0, 0.5)])
def test_rabr_lyapunov_contraction(mu_x, mu_y, c):
    P = coupled_quadratic(mu_x, mu_y, c, dim=2)
    start = (np.array([0.6, -0.5]), np.array([-0.7, 0.2]))
    _, tr = rabr(P, start, T=8)
    V = tr.extras["lyapunov"]
    for a, b in zip(V, V[1:]):
        if a > 1e-24:
            assert b <= 0.6 * a
    for r in tr.extras["ratio_x"] + tr.extras["ratio_y"]:
        assert r <= 1 / 256 + 1e-12


def test_rabr_fixed_budget_variant():
    P = coupled_quadratic(1.0, 1.0, 0.3, dim=1)
    start = (np.array([0.8]), np.array([-0.6]))
    _, tr = rabr(P, start, T=4, certify=False)
    V = tr.extras["lyapunov"]
    assert all(b <= 0.6 * a for a, b in zip(V, V[1:]))


def test_rabr_budget_formula():
    P = coupled_quadratic(1.0, 1.0, 0.1)
    Tx, Ty = rabr_budgets(P)
    assert Tx == Ty == math.ceil(90 * math.log(512))
    P = quadratic_saddle([1.0], [2.0], [[0.1]]).with_constants(Lx=4.0, Ly=8.0)
    assert rabr_budgets(P, xi=2.0) == (math.ceil(360 * math.log(512)), math.ceil(360 * math.log(512)))


def test_rabr_weak_interaction_message():
    P = coupled_quadratic(1.0, 1.0, 0.5)
    with pytest.raises(PreconditionError, match="L_xy < 1/2 sqrt"):
        rabr(P, P.saddle, T=1)
    with pytest.raises(PreconditionError):
        rabr(coupled_quadratic(1.0, 1.0, 0.1), ((0,), (0,)))


# -- nested scheme -------------------------------------------------------------


def test_schedule_eta_example():
    P = quadratic_saddle([1.0], [1.0], [[2.0]])
    s = RammaSchedule.build(P, 1e-3)
    assert s.xi == 1.0
    assert s.eta_x == pytest.approx(1 / 11)
    assert s.eta_y == pytest.approx(1 / 11)
    assert s.decoupled and not s.repaired


def test_schedule_euclidean_xi():
    assert curvature_xi(coupled_quadratic(1.0, 1.0, 0.1)) == 1.0


@given(
    st.floats(0.05, 5.0),
    st.floats(0.05, 5.0),
    st.floats(0.0, 20.0),
    st.floats(1.0, 4.0),
)
def test_schedule_always_decoupled(mx, my, lxy, lfac):
    P = quadratic_saddle([mx, mx * lfac], [my, my * lfac], np.eye(2) * lxy)
    s = RammaSchedule.build(P, 1e-3)
    assert P.Lxy <= s.Lxy_bound * (1 + 1e-12)
    assert s.eta_x > 0 and s.eta_y > 0


def test_schedule_eta_override_checked():
    P = quadratic_saddle([1.0], [1.0], [[2.0]])
    s = RammaSchedule.build(P, 1e-3, eta=(0.1, 0.1))
    assert s.eta_x == 0.1
    with pytest.raises(PreconditionError, match="decoupling"):
        RammaSchedule.build(P, 1e-3, eta=(1.0, 1.0))
    with pytest.raises(ConfigError):
        RammaSchedule.build(P, 1e-3, eta=(0.0, 1.0))
    with pytest.raises(ConfigError):
        RammaSchedule.build(P, -1.0)
    with pytest.raises(PreconditionError):
        RammaSchedule.build(bilinear_problem([[1.0]]), 1e-3)


def test_schedule_accuracies_positive_and_ordered():
    P = quadratic_saddle([1.0, 2.0], [1.0, 2.0], np.eye(2))
    s = RammaSchedule.build(P, 1e-3)
    assert 0 < s.eps5 < s.eps_hat3 < s.eps3 < s.eps_hat1 < s.eps1 < s.eps
    assert min(s.T1, s.T2, s.T3, s.T4, s.T5) >= 1


def test_ramma_strongly_coupled_quadratic():
    P = quadratic_saddle([1.0, 2.0], [1.5, 2.0], [[1.5, 0.3], [-0.2, 1.2]])
    start = (np.array([0.6, -0.4]), np.array([-0.5, 0.5]))
    eps = 1e-6
    (x, y), cert, tr = ramma(P, start, eps)
    assert cert.gap <= eps
    assert cert.gap == pytest.approx(cert.gap_x + cert.gap_y, abs=1e-12)
    # distance consistent with the one-gap-to-distance bound
    assert np.sum(x**2) <= 2 * cert.gap_x / P.mu_x + 1e-15
    assert np.sum(y**2) <= 2 * cert.gap_y / P.mu_y + 1e-15
    assert tr.extras["level_calls"]["inner"] >= 1
    gaps = tr.column("gap_upper")
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_ramma_swaps_and_rescales():
    P = quadratic_saddle([0.5, 4.0], [2.0, 2.0], [[1.0, 0.0], [0.0, 1.0]])
    start = (np.array([0.3, -0.2]), np.array([0.1, 0.4]))
    (x, y), cert, tr = ramma(P, start, 1e-5)
    norm = tr.extras["normalization"]
    assert norm["swapped"]
    assert cert.gap <= 1e-5
    assert x.shape == (2,) and y.shape == (2,)


def test_ramma_robust_karcher_brute_force(rng):
    P = random_robust_karcher(rng)
    eps = 1e-4
    (x, y), cert, _ = ramma(P, (P.X.center, P.Y.center), eps)
    _, upper = brute_force_best_response(P, x, "y", tol=1e-12)
    _, lower = brute_force_best_response(P, y, "x", tol=1e-12)
    assert upper - lower <= eps
    assert cert.gap <= eps


def test_ramma_certified_mode_small_budget():
    P = quadratic_saddle([1.0], [1.0], [[0.3]])
    start = (np.array([0.5]), np.array([-0.5]))
    (x, y), cert, tr = ramma(P, start, 1e-3, mode="certified", budget_cap=3)
    assert math.isfinite(cert.gap)
    assert tr.extras["schedule"]["T1"] >= 3


def test_ramma_errors():
    P = bilinear_problem([[1.0]])
    with pytest.raises(PreconditionError, match="reduce_to_scsc"):
        ramma(P, P.saddle, 1e-3)
    Q = coupled_quadratic(1.0, 1.0, 0.2)
    with pytest.raises(ConfigError):
        ramma(Q, Q.saddle, 1e-3, mode="fast")


# -- regularisation reduction ---------------------------------------------------


def test_reduce_coefficient_and_constants():
    P = bilinear_problem([[1.0]], radius=0.5)
    R = reduce_to_scsc(P, (np.zeros(1), np.zeros(1)), 0.1, D=1.0)
    assert R.meta["coefficient"] == pytest.approx(0.025)
    assert R.mu_x == pytest.approx(0.05) and R.mu_y == pytest.approx(0.05)
    assert R.kind == "SCSC"


def test_reduce_passthrough_and_scc():
    Q = coupled_quadratic(1.0, 1.0, 0.2)
    assert reduce_to_scsc(Q, Q.saddle, 0.1) is Q
    S = quadratic_saddle([1.0], [0.0], [[0.5]])
    assert S.kind == "SCC"
    R = reduce_to_scsc(S, S.saddle, 0.1)
    assert R.mu_x > S.mu_x and R.mu_y > 0
    with pytest.raises(ConfigError):
        reduce_to_scsc(bilinear_problem([[1.0]]), (np.zeros(1), np.zeros(1)), 0.1, D=math.inf)
    with pytest.raises(ConfigError):
        reduce_to_scsc(bilinear_problem([[1.0]]), (np.zeros(1), np.zeros(1)), 0.0)


def test_reduced_bilinear_gap_on_original():
    P = bilinear_problem([[1.0, 0.5], [-0.3, 0.8]], radius=0.5)
    start = (np.array([0.3, 0.2]), np.array([-0.2, 0.3]))
    eps = 1e-2
    (x, y), cert, _ = solve_regularized(P, start, eps)
    # exact best responses of a bilinear form on a ball
    C = np.array([[1.0, 0.5], [-0.3, 0.8]])
    upper = 0.5 * np.linalg.norm(C.T @ x)
    lower = -0.5 * np.linalg.norm(C @ y)
    assert upper - lower <= eps
    assert cert.gap == pytest.approx(upper - lower, abs=1e-12)


# -- gap toolkit ----------------------------------------------------------------


def test_toolkit_zero_at_saddle():
    P = coupled_quadratic(1.0, 2.0, 0.3, dim=2)
    x, y = P.saddle
    cert = certified_gap(P, x, y)
    assert cert.gap == 0.0 and cert.gap_x == 0.0 and cert.gap_y == 0.0
    assert pair_gap_certificate(P, x, y)[0] == 0.0
    assert one_gap_to_one_dist(cert.gap_x, P.mu_x) == 0.0
    assert dist_to_gap(0.0, 0.0, 1.0, 1.0, 0.3, 1.0, 2.0) == 0.0


def test_full_gap_bounds_each_side(rng):
    P = coupled_quadratic(1.0, 2.0, 0.9, dim=2)
    for _ in range(200):
        x, y = P.X.sample(rng), P.Y.sample(rng)
        c = certified_gap(P, x, y)
        g = full_gap_to_one_gap(c.gap)
        assert c.gap_x <= g + 1e-12 and c.gap_y <= g + 1e-12
        assert c.gap_x >= -1e-12 and c.gap_y >= -1e-12


def test_one_gap_to_one_dist_1000_points(rng):
    P = coupled_quadratic(1.5, 0.7, 0.9, dim=2)
    for _ in range(1000):
        x, y = P.X.sample(rng), P.Y.sample(rng)
        c = certified_gap(P, x, y)
        assert np.sum(x**2) <= one_gap_to_one_dist(c.gap_x, P.mu_x) + 1e-12
        assert np.sum(y**2) <= one_gap_to_one_dist(c.gap_y, P.mu_y) + 1e-12


def test_dist_repair_example_value():
    assert dist_repair_bound(1e-6, 1e-4, 1.0, 1.0, 0.4) == pytest.approx(2.68e-4, rel=1e-12)


def test_dist_repair_holds(rng):
    P = coupled_quadratic(1.0, 1.0, 0.4, dim=2)
    for _ in range(20):
        y = P.Y.sample(rng) * 1e-2
        gy = certified_gap(P, P.X.center, y).gap_y
        eps = max(gy, 1e-12)
        x, bound = one_gap_to_dist_repair(P, y, eps, 1e-9)
        assert np.sum(x**2) + np.sum(y**2) <= bound + 1e-15


def test_dist_to_gap_holds(rng):
    P = coupled_quadratic(1.0, 2.0, 0.8, dim=2)
    lx, ly = P.lipschitz_bounds()
    for _ in range(300):
        x, y = P.X.sample(rng), P.Y.sample(rng)
        g = certified_gap(P, x, y).gap
        b = dist_to_gap(np.linalg.norm(x), np.linalg.norm(y), lx, ly, P.Lxy, P.mu_x, P.mu_y)
        assert g <= b + 1e-12


def test_toolkit_domain_errors():
    with pytest.raises(DomainError):
        one_gap_to_one_dist(1.0, 0.0)
    with pytest.raises(DomainError):
        dist_repair_bound(1e-6, 1e-4, 0.0, 1.0, 0.4)
    with pytest.raises(DomainError):
        dist_to_gap(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0)


def test_pair_certificate_bounds_gap(rng):
    P = synthetic_saddle(rng, coupling=0.3)
    for _ in range(50):
        x, y = P.X.sample(rng), P.Y.sample(rng)
        ub, _ = pair_gap_certificate(P, x, y)
        assert certified_gap(P, x, y, tol=1e-12).gap <= ub + 1e-9


def test_certificate_json_round_trip():
    c = SaddleCertificate(gap=1e-5, gap_x=4e-6, method="closed-form")
    d = SaddleCertificate.from_json(c.to_json())
    assert d.gap == c.gap and d.gap_x == c.gap_x and math.isnan(d.gap_y)
    assert d.method == "closed-form"


def test_swap_preserves_gap(rng):
    P = coupled_quadratic(1.0, 2.0, 0.7, dim=2)
    S = P.swapped()
    for _ in range(20):
        x, y = P.X.sample(rng), P.Y.sample(rng)
        assert certified_gap(S, y, x).gap == pytest.approx(certified_gap(P, x, y).gap, abs=1e-12)
