"""Independent reference values frozen into the test suite.

Nothing here imports riemmax. Hyperbolic quantities come from numerically
integrating the geodesic equation x'' = <x', x'>_L x on the hyperboloid and
from Schild's ladder built on mpmath closed forms; curvature constants come
from 50-digit evaluation. Run it to regenerate the literals:

    python3 tests/oracles/derive_values.py
"""
import json

import mpmath as mp

mp.mp.dps = 50


def lorentz(u, v):
    return -u[0] * v[0] + sum(a * b for a, b in zip(u[1:], v[1:]))


def geodesic_rk4(x, v, t, steps=4000):
    """Integrate x'' = <x', x'>_L x from (x, v) for time t with classical RK4."""
    h = mp.mpf(t) / steps
    x = [mp.mpf(a) for a in x]
    v = [mp.mpf(a) for a in v]

    def acc(x, v):
        s = lorentz(v, v)
        return [s * a for a in x]

    for _ in range(steps):
        k1x, k1v = v, acc(x, v)
        x2 = [a + h / 2 * b for a, b in zip(x, k1x)]
        v2 = [a + h / 2 * b for a, b in zip(v, k1v)]
        k2x, k2v = v2, acc(x2, v2)
        x3 = [a + h / 2 * b for a, b in zip(x, k2x)]
        v3 = [a + h / 2 * b for a, b in zip(v, k2v)]
        k3x, k3v = v3, acc(x3, v3)
        x4 = [a + h * b for a, b in zip(x, k3x)]
        v4 = [a + h * b for a, b in zip(v, k3v)]
        k4x, k4v = v4, acc(x4, v4)
        x = [a + h / 6 * (b + 2 * c + 2 * d + e) for a, b, c, d, e in zip(x, k1x, k2x, k3x, k4x)]
        v = [a + h / 6 * (b + 2 * c + 2 * d + e) for a, b, c, d, e in zip(v, k1v, k2v, k3v, k4v)]
    return x, v


def distance_by_shooting(target, steps=400):
    """Arclength from (1,0,0) along the unit-speed geodesic (0,1,0) until it reaches ``target``."""
    def miss(s):
        x, _ = geodesic_rk4([1, 0, 0], [0, 1, 0], s, steps)
        return x[1] - target[1]

    return mp.findroot(miss, mp.mpf(1.5))


# closed forms written out independently for the ladder
def h_exp(x, v):
    n = mp.sqrt(max(lorentz(v, v), mp.mpf(0)))
    if n == 0:
        return list(x)
    return [mp.cosh(n) * a + mp.sinh(n) / n * b for a, b in zip(x, v)]


def h_log(x, y):
    a = max(-lorentz(x, y), mp.mpf(1))
    d = mp.acosh(a)
    if d == 0:
        return [mp.mpf(0)] * len(x)
    u = [b - a * c for b, c in zip(y, x)]
    return [d / mp.sinh(d) * c for c in u]


def h_mid(p, q):
    return h_exp(p, [c / 2 for c in h_log(p, q)])


def schild_ladder(x0, v, x1, rungs):
    """Transport v from x0 to x1 along the geodesic with ``rungs`` ladder steps."""
    w = h_log(x0, x1)
    cur, vec = x0, v
    scale = mp.mpf(10) ** -12  # short rung: transport a tiny copy of v and scale back
    for k in range(1, rungs + 1):
        nxt = h_exp(x0, [mp.mpf(k) / rungs * c for c in w])
        a = h_exp(cur, [scale * c for c in vec])
        m = h_mid(a, nxt)
        b = h_exp(cur, [2 * c for c in h_log(cur, m)])
        vec = [c / scale for c in h_log(nxt, b)]
        cur = nxt
    return vec


def ladder_extrapolated(x0, v, x1):
    # Richardson extrapolation in the rung count
    a = schild_ladder(x0, v, x1, 256)
    b = schild_ladder(x0, v, x1, 512)
    return [2 * q - p for p, q in zip(a, b)]


def main():
    out = {}
    out["zeta_1_m1"] = mp.nstr(1 * mp.coth(1), 20)
    t = mp.pi / 4
    out["delta_pi4_1"] = mp.nstr(t * mp.cot(t), 20)
    out["zeta_2_m1"] = mp.nstr(2 * mp.coth(2), 20)
    out["zeta_1_m4"] = mp.nstr(2 * mp.coth(2), 20)
    for s in ("0.5", "1", "2"):
        x, _ = geodesic_rk4([1, 0, 0], [0, 1, 0], mp.mpf(s))
        out[f"exp_h2_t{s}"] = [mp.nstr(c, 17) for c in x]
    x, _ = geodesic_rk4([1, 0, 0], [0, mp.mpf("0.6"), mp.mpf("0.8")], 1)
    out["exp_h2_oblique"] = [mp.nstr(c, 17) for c in x]
    out["dist_h2_2"] = mp.nstr(distance_by_shooting([mp.cosh(2), mp.sinh(2), 0]), 17)
    x1 = [mp.cosh(1), mp.sinh(1), mp.mpf(0)]
    out["transport_normal"] = [mp.nstr(c, 12) for c in ladder_extrapolated([1, 0, 0], [0, 0, 1], x1)]
    out["transport_along"] = [mp.nstr(c, 12) for c in ladder_extrapolated([1, 0, 0], [0, 1, 0], x1)]
    # a generic case: transport (0, 0.3, -0.5) from (1,0,0) to the point with spatial part (0.4, 0.7)
    s = [mp.mpf("0.4"), mp.mpf("0.7")]
    x2 = [mp.sqrt(1 + s[0] ** 2 + s[1] ** 2)] + s
    out["transport_generic"] = [mp.nstr(c, 12) for c in ladder_extrapolated([1, 0, 0], [0, mp.mpf("0.3"), mp.mpf("-0.5")], x2)]
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
