"""Command line entry point.

    riemmax solve <config>           run one experiment
    riemmax bench <config-dir>       run every *.cfg in a directory
    riemmax check [scope]            run the property checks (geometry, solvers, all)

Exit status: 0 ok, 1 invariant or precondition failure, 2 configuration error.
Log verbosity comes from RIEMMAX_LOG_LEVEL (default WARNING).
"""
import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import ExperimentConfig
from .errors import ConfigError, RiemmaxError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
LOG_ENV = "RIEMMAX_LOG_LEVEL"


def _setup_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def trace_invariants(trace, certified=False):
    """Violated trace invariants as a list of messages (empty when all hold)."""
    bad = []
    for a, b in zip(trace.rows, trace.rows[1:]):
        if b[1] < a[1] or b[2] < a[2]:
            bad.append(f"oracle counters decreased between rows {a[0]} and {b[0]}")
            break
    if certified:
        gaps = [r[4] for r in trace.rows if r[4] == r[4]]
        if any(b > a for a, b in zip(gaps, gaps[1:])):
            bad.append("certified gap upper bound increased")
    return bad


def _solve_one(path):
    """Run one config; returns (exit code, summary dict or error message)."""
    from .runner import run_experiment

    try:
        cfg = ExperimentConfig.load(path)
        res = run_experiment(cfg)
    except ConfigError as e:
        return EXIT_CONFIG, {"config": str(path), "error": str(e), "key": e.key}
    except RiemmaxError as e:
        return EXIT_FAIL, {"config": str(path), "error": f"{type(e).__name__}: {e}"}
    out = res.summary()
    out["config"] = str(path)
    certified = cfg.solver["name"] == "ramma"
    bad = trace_invariants(res.trace, certified=certified)
    out["invariant_failures"] = bad
    return (EXIT_FAIL if bad else EXIT_OK), out


def cmd_solve(args):
    code, out = _solve_one(args.config)
    print(json.dumps(out, indent=2, sort_keys=True))
    return code


def cmd_bench(args):
    if not os.path.isdir(args.config_dir):
        print(f"not a directory: {args.config_dir}", file=sys.stderr)
        return EXIT_CONFIG
    paths = sorted(os.path.join(args.config_dir, f) for f in os.listdir(args.config_dir) if f.endswith(".cfg"))
    if not paths:
        print(f"no .cfg files in {args.config_dir}", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_solve_one, paths))
    else:
        results = [_solve_one(p) for p in paths]
    worst = EXIT_OK
    for path, (code, out) in zip(paths, results):
        name = os.path.basename(path)
        if "error" in out:
            print(f"{name:32s} {'CONFIG' if code == EXIT_CONFIG else 'FAIL':6s} {out['error']}")
        else:
            cert = out["certificate"]
            slope = out["rate_fit"].get("slope_per_call")
            print(
                f"{name:32s} {'ok' if code == EXIT_OK else 'FAIL':6s} gap={cert['gap']:.3e} "
                f"calls={out['grad_calls'] + out['proj_calls']} "
                f"slope/call={'n/a' if slope is None else format(slope, '.3e')}"
            )
        worst = max(worst, code)
    return worst


def cmd_check(args):
    from .validate import validate_suite

    report = validate_suite(args.scope, inject_fault=args.inject_fault, seed=args.seed)
    print(report.render())
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="riemmax", description="Riemannian min-max solvers and benchmarks")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run one experiment config")
    s.add_argument("config")
    s.set_defaults(func=cmd_solve)
    b = sub.add_parser("bench", help="run every .cfg file in a directory")
    b.add_argument("config_dir")
    b.add_argument("--jobs", type=int, default=1, help="experiments to run in parallel")
    b.set_defaults(func=cmd_bench)
    c = sub.add_parser("check", help="run the invariant and property checks")
    c.add_argument("scope", nargs="?", default="all", choices=("geometry", "solvers", "all"))
    c.add_argument("--inject-fault", action="store_true", help="corrupt one gradient oracle (negative control)")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
