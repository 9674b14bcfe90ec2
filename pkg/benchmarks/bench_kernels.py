"""Compare the numba and numpy hyperboloid kernels.

Times single-pair calls (the pattern inside the solvers) and batched row
calls (the pattern of the property sweeps), checks that both paths agree, and
times one end-to-end solve with each backend in a fresh interpreter.

    python benchmarks/bench_kernels.py [--n 20000] [--reps 5]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from riemmax import kernels


def cloud(rng, n, dim, spread=1.0):
    s = spread * rng.standard_normal((n, dim))
    return np.concatenate([np.sqrt(1.0 + np.sum(s * s, axis=1))[:, None], s], axis=1)


def tangents(X, rng):
    U = rng.standard_normal(X.shape)
    return kernels.tangent_project(X, U)


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_backend(k, X, Y, V, reps, singles):
    out = {}
    out["dist_rows"] = best_of(lambda: k.dist_rows(X, Y), reps)
    out["exp_rows"] = best_of(lambda: k.exp_rows(X, V), reps)
    out["log_rows"] = best_of(lambda: k.log_rows(X, Y), reps)
    out["transport_rows"] = best_of(lambda: k.transport_rows(Y, X, V), reps)

    def loop():
        for i in range(singles):
            k.exp(X[i], V[i])
            k.log(X[i], Y[i])

    out["single exp+log"] = best_of(loop, reps)
    return out


SOLVE = """
import time, numpy as np
from riemmax.problems import random_karcher
from riemmax.gconvex import prgd
from riemmax.kernels import BACKEND
rng = np.random.default_rng(0)
K = random_karcher(rng, dim=3, m=20)
prgd(K, K.feasible.center, max_iter=5)
t = time.perf_counter()
for _ in range(20):
    prgd(K, K.feasible.sample(rng), eps=1e-10)
print(BACKEND, time.perf_counter() - t)
"""


def solve_time(disable):
    env = dict(os.environ)
    env["RIEMMAX_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True, check=True)
    name, t = out.stdout.split()
    return name, float(t)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--singles", type=int, default=2000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X, Y = cloud(rng, args.n, args.dim), cloud(rng, args.n, args.dim)
    V = tangents(X, rng)

    nb, npk = kernels.numba_kernels, kernels.numpy_kernels
    nb.dist_rows(X[:2], Y[:2])  # compile
    nb.exp_rows(X[:2], V[:2])
    nb.log_rows(X[:2], Y[:2])
    nb.transport_rows(Y[:2], X[:2], V[:2])
    nb.exp(X[0], V[0])
    nb.log(X[0], Y[0])

    def rel(a, b):
        return np.max(np.abs(a - b) / (1.0 + np.abs(b)))

    err = max(
        rel(nb.dist_rows(X, Y), npk.dist_rows(X, Y)),
        rel(nb.exp_rows(X, V), npk.exp_rows(X, V)),
        rel(nb.log_rows(X, Y), npk.log_rows(X, Y)),
        rel(nb.transport_rows(Y, X, V), npk.transport_rows(Y, X, V)),
    )
    print(f"backends agree to {err:.2e} (relative) on {args.n} rows (dim {args.dim})")

    t_nb = bench_backend(nb, X, Y, V, args.reps, args.singles)
    t_np = bench_backend(npk, X, Y, V, args.reps, args.singles)
    print(f"{'kernel':18s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for key in t_nb:
        a, b = 1e3 * t_nb[key], 1e3 * t_np[key]
        print(f"{key:18s} {a:10.2f} {b:10.2f} {b / a:8.2f}")

    for disable in (False, True):
        name, t = solve_time(disable)
        print(f"20 prgd solves, {name:5s} backend: {t:.3f} s")


if __name__ == "__main__":
    main()
