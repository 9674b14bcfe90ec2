"""Named problem builders and solver options used by config files."""
import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .manifolds import Euclidean, Hyperboloid
from . import problems as P

SOLVERS = {
    "prgd": "gconvex",
    "riemacon_abs": "gconvex",
    "rceg": "minmax",
    "rabr": "minmax",
    "ramma": "minmax",
}

_COMMON = {"name", "epsilon", "max_iter"}
_SOLVER_KEYS = {
    "prgd": set(),
    "riemacon_abs": {"lam"},
    "rceg": {"mode", "eta", "uniform"},
    "rabr": {"rho"},
    "ramma": {"mode", "eta_x", "eta_y", "floor", "certify_tol"},
}


def solver_keys(name):
    return _COMMON | _SOLVER_KEYS[name]


@dataclass
class ProblemSpec:
    kind: str
    keys: frozenset
    build: object


def _manifold(params, key="manifold"):
    name = params.get(key, "hyperboloid")
    dim = params.get("dim", 2)
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError("dimension must be a positive integer", key="problem.dim")
    if name == "hyperboloid":
        return Hyperboloid(dim, params.get("scale", 1.0))
    if name == "euclidean":
        return Euclidean(dim, params.get("scale", 1.0))
    raise ConfigError(f"unknown manifold {name!r}, expected hyperboloid or euclidean", key=f"problem.{key}")


def _read_points_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        return [[float(v) for v in r] for r in rows]
    except ValueError:
        return [[float(v) for v in r] for r in rows[1:]]


def _anchors(params, M, base_dir):
    """Anchor points from ``anchors`` (inline matrix) or ``anchors_csv``; None if absent.

    Rows hold intrinsic coordinates: spatial coordinates on the hyperboloid,
    plain coordinates in Euclidean space.
    """
    if "anchors" in params and "anchors_csv" in params:
        raise ConfigError("give anchors inline or as a CSV, not both", key="problem.anchors_csv")
    rows = params.get("anchors")
    if "anchors_csv" in params:
        path = params["anchors_csv"]
        path = path if os.path.isabs(path) else os.path.join(base_dir, path)
        try:
            rows = _read_points_csv(path)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read anchors: {e}", key="problem.anchors_csv") from None
    if rows is None:
        return None
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != M.dim:
        raise ConfigError(f"anchors need {M.dim} coordinates per row, got {rows.shape[1]}", key="problem.anchors")
    if isinstance(M, Hyperboloid):
        return np.array([M.from_spatial(r / M.scale) for r in rows])
    return rows


def _karcher(params, rng, base_dir):
    M = _manifold(params)
    anchors = _anchors(params, M, base_dir)
    radius = params.get("radius", 1.0)
    if anchors is None:
        if not isinstance(M, Hyperboloid):
            raise ConfigError("random Karcher instances live on the hyperboloid; give anchors", key="problem.anchors")
        return P.random_karcher(rng, M.dim, params.get("m", 5), params.get("spread", 1.5), radius, M.scale)
    w = np.asarray(params.get("weights", [1.0] * len(anchors)), dtype=float)
    if w.shape != (len(anchors),) or np.any(w < 0) or w.sum() <= 0:
        raise ConfigError("weights must be nonnegative, one per anchor, not all zero", key="problem.weights")
    return P.karcher_problem(M, anchors, w / w.sum(), M.origin(), radius)


def _diagonal(params, rng, base_dir):
    eigs = params.get("eigs")
    if eigs is None:
        raise ConfigError("missing eigenvalues", key="problem.eigs")
    eigs = np.atleast_1d(np.asarray(eigs, dtype=float))
    if np.any(eigs <= 0):
        raise ConfigError("eigenvalues must be positive", key="problem.eigs")
    target = params.get("target")
    target = rng.standard_normal(eigs.size) if target is None else np.atleast_1d(np.asarray(target, dtype=float))
    return P.diagonal_quadratic(eigs, target, params.get("radius", 1.0))


def _robust_karcher(params, rng, base_dir):
    M = _manifold(params)
    anchors = _anchors(params, M, base_dir)
    lam_w = params.get("lam_w", 8.0)
    radius = params.get("radius", 0.6)
    if anchors is None:
        if not isinstance(M, Hyperboloid):
            raise ConfigError("random robust Karcher instances live on the hyperboloid; give anchors",
                              key="problem.anchors")
        return P.random_robust_karcher(rng, M.dim, params.get("m", 3), lam_w, params.get("spread", 0.6), radius,
                                       M.scale)
    return P.robust_karcher(M, anchors, lam_w, M.origin(), radius, params.get("margin"))


def _synthetic(params, rng, base_dir):
    return P.synthetic_saddle(
        rng,
        kind=params.get("manifold", "hyperboloid"),
        dim=params.get("dim", 2),
        a=params.get("a", 1.0),
        b=params.get("b", 1.0),
        coupling=params.get("coupling", 0.3),
        radius=params.get("radius", 0.8),
        offset=params.get("offset", 0.3),
        samples=params.get("samples", 400),
    )


def _coupled(params, rng, base_dir):
    return P.coupled_quadratic(params.get("mu_x", 1.0), params.get("mu_y", 1.0), params.get("c", 0.3),
                               params.get("dim", 1), params.get("radius", 1.0))


def _quadratic(params, rng, base_dir):
    for k in ("a", "b", "c"):
        if k not in params:
            raise ConfigError("missing coefficient", key=f"problem.{k}")
    return P.quadratic_saddle(params["a"], params["b"], params["c"], params.get("radius", 1.0),
                              params.get("radius_y", params.get("radius", 1.0)))


def _bilinear(params, rng, base_dir):
    C = params.get("c")
    if C is None:
        C = rng.standard_normal((params.get("dim", 2), params.get("dim", 2)))
        C = C / np.linalg.norm(C, 2)
    return P.bilinear_problem(params.get("scale", 1.0) * np.atleast_2d(np.asarray(C, dtype=float)),
                              params.get("radius", 1.0))


def _hline(params, rng, base_dir):
    r = params.get("radius", 1.0)
    return P.hyperbolic_line_cc(params.get("alpha", 0.0), params.get("beta", 1.0), params.get("gamma", 0.0),
                                params.get("anchor", 0.0), r, params.get("radius_y", r))


_SPACE = {"manifold", "dim", "scale", "radius"}
PROBLEMS = {
    "karcher": ProblemSpec("gconvex", frozenset(_SPACE | {"m", "spread", "anchors", "anchors_csv", "weights"}),
                           _karcher),
    "diagonal_quadratic": ProblemSpec("gconvex", frozenset({"eigs", "target", "radius"}), _diagonal),
    "robust_karcher": ProblemSpec(
        "minmax", frozenset(_SPACE | {"m", "spread", "anchors", "anchors_csv", "lam_w", "margin"}), _robust_karcher
    ),
    "synthetic_saddle": ProblemSpec(
        "minmax", frozenset({"manifold", "dim", "a", "b", "coupling", "radius", "offset", "samples"}), _synthetic
    ),
    "coupled_quadratic": ProblemSpec("minmax", frozenset({"mu_x", "mu_y", "c", "dim", "radius"}), _coupled),
    "quadratic_saddle": ProblemSpec("minmax", frozenset({"a", "b", "c", "radius", "radius_y"}), _quadratic),
    "bilinear": ProblemSpec("minmax", frozenset({"c", "dim", "scale", "radius"}), _bilinear),
    "hyperbolic_line_cc": ProblemSpec(
        "minmax", frozenset({"alpha", "beta", "gamma", "anchor", "radius", "radius_y"}), _hline
    ),
}


def build_problem(params, base_dir="."):
    """Instantiate ``params['name']`` with an rng seeded from ``params['seed']``."""
    spec = PROBLEMS[params["name"]]
    rng = np.random.default_rng(params.get("seed", 0))
    try:
        return spec.build(params, rng, base_dir), rng
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad parameters: {e}", key=f"problem.{params['name']}") from None
