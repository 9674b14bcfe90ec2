"""Config-driven experiment runs: trace, certificate, rate fit and artifacts."""
import hashlib
import json
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .gconvex import gap_certificate, prgd, riemacon_abs
from .minmax import SaddleCertificate, certified_gap, rabr, ramma, rceg, solve_regularized
from .problem import GConvexProblem
from .problems import reference_saddle, solve_reference
from .registry import build_problem
from .trace import COLUMNS, OracleCounter, RunTrace

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    trace: RunTrace
    certificate: SaddleCertificate
    rate_fit: dict
    config: object

    def summary(self):
        return {
            "problem": self.config.problem["name"],
            "solver": self.config.solver["name"],
            "rows": len(self.trace),
            "grad_calls": self.trace.last[1] if self.trace.rows else 0,
            "proj_calls": self.trace.last[2] if self.trace.rows else 0,
            "certificate": self.certificate.to_dict(),
            "rate_fit": self.rate_fit,
        }


def _slope(t, v):
    if len(t) < 2 or np.ptp(t) == 0:
        return None
    return float(np.polyfit(np.asarray(t, float), np.asarray(v, float), 1)[0])


def fit_rates(trace, column="gap_upper"):
    """Least-squares slopes of log(column) against iteration and against oracle calls.

    Only rows with a finite positive entry take part. Slopes are None when
    fewer than two such rows exist.
    """
    rows = [r for r in trace.rows if math.isfinite(r[COLUMNS.index(column)]) and r[COLUMNS.index(column)] > 0]
    it = [r[0] for r in rows]
    calls = [r[1] + r[2] for r in rows]
    lg = [math.log(r[COLUMNS.index(column)]) for r in rows]
    return {"column": column, "rows": len(rows), "slope_per_iter": _slope(it, lg), "slope_per_call": _slope(calls, lg)}


def _with_reference(problem):
    if isinstance(problem, GConvexProblem):
        if problem.minimizer is None:
            xs, _ = solve_reference(problem)
            problem = replace(problem, minimizer=xs, fstar=problem.f(xs))
        elif problem.fstar is None:
            problem = replace(problem, fstar=problem.f(problem.minimizer))
        return problem
    if problem.saddle is None and problem.best_response_y is not None and problem.mu_x > 0:
        problem = replace(problem, saddle=reference_saddle(problem))
    return problem


def _gconvex_cert(problem, x, counter):
    g = problem.grad(x)
    cert = gap_certificate(problem, x, g)
    ref = problem.minimizer
    return SaddleCertificate(
        gap=cert,
        gap_x=problem.f(x) - problem.fstar if problem.fstar is not None else math.nan,
        gap_y=0.0,
        dist_sq=problem.manifold.sqdist(x, ref) if ref is not None else math.nan,
        method="gradient-certificate",
    )


def _run_gconvex(cfg, problem, rng, counter, trace):
    s = cfg.solver
    eps = s.get("epsilon", 1e-6)
    budget = s.get("max_iter")
    x0 = problem.feasible.sample(rng)
    if s["name"] == "prgd":
        x, _ = prgd(problem, x0, eps=eps, max_iter=budget, counter=counter, trace=trace)
    else:
        lam = s.get("lam", 1.0 / problem.L)
        x, _ = riemacon_abs(problem, x0, lam, eps=eps, T=budget, counter=counter, trace=trace)
    return _gconvex_cert(problem, x, counter)


def _run_minmax(cfg, problem, rng, counter, trace):
    s = cfg.solver
    name = s["name"]
    budget = s.get("max_iter")
    start = (problem.X.sample(rng), problem.Y.sample(rng))
    if name == "rceg":
        mode = s.get("mode", "SCSC" if problem.kind == "SCSC" else "CC")
        if mode not in ("SCSC", "CC"):
            raise ConfigError("mode must be SCSC or CC", key="solver.mode")
        run = problem.with_uniform_constants() if mode == "SCSC" and s.get("uniform", True) else problem
        bound = None if problem.saddle is not None else math.hypot(problem.X.diameter, problem.Y.diameter)
        eps = s.get("epsilon", 1e-6 if mode == "SCSC" else 1e-2)
        if budget is None and mode == "CC":
            budget = min(100000, max(1, int(math.ceil(20.0 / eps))))
        (x, y), _ = rceg(run, start, mode=mode, T=budget, eps=eps, dist_bound=bound, counter=counter, trace=trace)
        if "eta" in s:
            log.warning("solver.eta is ignored by rceg; the step is fixed by the constants")
    elif name == "rabr":
        kw = {"rho": s["rho"]} if "rho" in s else {}
        (x, y), _ = rabr(problem, start, T=budget, eps=s.get("epsilon", 1e-8), counter=counter, trace=trace, **kw)
    else:
        mode = s.get("mode", "practical")
        kw = dict(mode=mode, counter=counter, trace=trace, budget_cap=budget)
        if "floor" in s:
            kw["floor"] = s["floor"]
        if "certify_tol" in s:
            kw["certify_tol"] = s["certify_tol"]
        if ("eta_x" in s) != ("eta_y" in s):
            raise ConfigError("give both eta_x and eta_y", key="solver.eta_x" if "eta_y" in s else "solver.eta_y")
        if "eta_x" in s:
            kw["eta"] = (s["eta_x"], s["eta_y"])
        eps = s.get("epsilon", 1e-4)
        if problem.kind == "SCSC":
            (x, y), cert, _ = ramma(problem, start, eps, **kw)
        else:
            (x, y), cert, _ = solve_regularized(problem, start, eps, **kw)
        return cert
    return certified_gap(problem, x, y)


def run_experiment(cfg, write=True):
    """Run ``cfg`` and return a RunResult; writes the configured outputs when ``write``."""
    problem, rng = build_problem(cfg.problem, cfg.base_dir)
    problem = _with_reference(problem)
    counter = OracleCounter()
    trace = RunTrace(counter)
    if isinstance(problem, GConvexProblem):
        cert = _run_gconvex(cfg, problem, rng, counter, trace)
        column = "gap_upper" if cfg.solver["name"] == "prgd" else "value"
    else:
        cert = _run_minmax(cfg, problem, rng, counter, trace)
        column = "gap_upper"
    fit = fit_rates(trace, column) if column == "gap_upper" else _value_fit(trace, problem.fstar)
    if any(math.isfinite(r[5]) for r in trace.rows):
        fit["dist_sq"] = fit_rates(trace, "dist_sq")
    result = RunResult(trace, cert, fit, cfg)
    if write:
        write_outputs(result)
    return result


def _value_fit(trace, fstar):
    shifted = RunTrace(trace.counter)
    shifted.rows = [r[:3] + (r[3], r[3] - fstar) + r[5:] for r in trace.rows]
    fit = fit_rates(shifted)
    fit["column"] = "value-fstar"
    return fit


def fixture_dict(result):
    csv_text = result.trace.to_csv()
    return {
        "config": result.config.to_text(),
        "csv_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
        "rows": len(result.trace),
        "certificate": result.certificate.to_dict(),
        "rate_fit": result.rate_fit,
    }


def write_outputs(result):
    cfg = result.config
    path = cfg.path("csv")
    if path:
        result.trace.to_csv(path)
    path = cfg.path("fixture")
    if path:
        with open(path, "w") as fh:
            json.dump(fixture_dict(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
    path = cfg.path("plot")
    if path:
        plot_trace(result.trace, path, title=f"{cfg.solver['name']} on {cfg.problem['name']}")


def plot_trace(trace, path, title=""):
    """Gap and squared distance against oracle calls. Reads the trace only."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise ConfigError("plotting needs matplotlib (pip install artifact[plot])", key="output.plot") from None
    calls = [r[1] + r[2] for r in trace.rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for col in ("gap_upper", "dist_sq"):
        i = COLUMNS.index(col)
        pts = [(c, r[i]) for c, r in zip(calls, trace.rows) if math.isfinite(r[i]) and r[i] > 0]
        if pts:
            ax.semilogy(*zip(*pts), label=col)
    ax.set_xlabel("oracle calls")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
