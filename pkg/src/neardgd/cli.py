"""Experiment runner: run / sweep / check subcommands.

Exit codes: 0 success, 1 validation error, 2 runtime divergence,
3 check-suite failure.
"""

import argparse
import hashlib
import multiprocessing
import os
import sys

import numpy as np

from . import checks
from .config import ConfigError, RunConfig, load_run_config_file
from .diagnostics import TRACE_COLUMNS
from .optimizer import DivergenceError, MethodSpec, SteplengthError, initial_point, run

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGENCE = 2
EXIT_CHECK_FAILURE = 3


def _load(args) -> RunConfig:
    cfg = load_run_config_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _out_path(args, cfg, default_name=None):
    name = default_name or cfg.output_path
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        return os.path.join(args.out, os.path.basename(name))
    return name


def cmd_run(args) -> int:
    try:
        cfg = _load(args)
        problem = cfg.build_problem()
        cm = cfg.build_consensus()
    except (ConfigError, ValueError) as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    try:
        result = run(problem, cm, cfg.method, cfg.alpha, cfg.budget, seed=cfg.seed,
                     cost_model=cfg.cost_model, grad_tol=cfg.grad_tol,
                     allow_large_alpha=cfg.allow_large_alpha,
                     box_radius=cfg.box_radius)
    except SteplengthError as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        print("divergence: %s" % exc, file=sys.stderr)
        return EXIT_DIVERGENCE
    path = _out_path(args, cfg)
    result.trace.write_csv(path)
    final = result.trace.final
    print("method=%s seed=%d iters=%d f_err=%.6g grad_avg_norm=%.6g cost=%.6g trace=%s"
          % (result.trace.method, cfg.seed, final.k, final.f_err,
             final.grad_avg_norm, final.cost, path))
    if result.diverged:
        print("divergence: %s" % result.trace.divergence_note, file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


def _sweep_one(payload):
    """Worker for one (method, seed) cell; arguments are picklable primitives."""
    config_path, method_token, seed = payload
    cfg = load_run_config_file(config_path) if config_path else RunConfig()
    problem = cfg.build_problem()
    cm = cfg.build_consensus()
    method = MethodSpec.parse(method_token)
    x0 = initial_point(problem.n, problem.p, seed)
    x0_hash = hashlib.sha256(x0.tobytes()).hexdigest()
    try:
        result = run(problem, cm, method, cfg.alpha, cfg.budget, seed=seed,
                     cost_model=cfg.cost_model, grad_tol=cfg.grad_tol,
                     allow_large_alpha=cfg.allow_large_alpha,
                     box_radius=cfg.box_radius, x0=x0)
        return method_token, seed, x0_hash, result.trace, None
    except DivergenceError as exc:
        return method_token, seed, x0_hash, None, str(exc)


def cmd_sweep(args) -> int:
    try:
        cfg = _load(args)
        if not cfg.sweep_methods:
            raise ConfigError("sweep requires a nonempty sweep.methods list")
        seeds = cfg.sweep_seeds or [cfg.seed]
        if args.seed is not None:
            seeds = [args.seed]
        for m in cfg.sweep_methods:
            pass  # MethodSpec construction already validated names
    except (ConfigError, ValueError) as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION

    jobs = [(args.config, m.label(), s) for s in seeds for m in cfg.sweep_methods]
    if args.parallel and args.parallel > 1:
        with multiprocessing.Pool(args.parallel) as pool:
            results = pool.map(_sweep_one, jobs)
    else:
        results = [_sweep_one(job) for job in jobs]

    # same seed must mean the same initial point for every method
    hashes = {}
    for method_token, seed, x0_hash, _, _ in results:
        assert hashes.setdefault(seed, x0_hash) == x0_hash, \
            "initial point mismatch for seed %d" % seed

    path = _out_path(args, cfg, default_name="sweep.csv")
    any_divergence = False
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["method", "seed"] + list(TRACE_COLUMNS)) + "\n")
        for method_token, seed, _, trace, error in results:
            if trace is None:
                print("divergence (%s, seed %d): %s" % (method_token, seed, error),
                      file=sys.stderr)
                any_divergence = True
                continue
            if trace.diverged:
                any_divergence = True
            trace.write_csv_to(fh, header=False, extra_key_columns=True)
            final = trace.final
            print("method=%s seed=%d f_err=%.6g cost=%.6g"
                  % (method_token, seed, final.f_err, final.cost))
    print("sweep written to %s" % path)
    return EXIT_DIVERGENCE if any_divergence else EXIT_OK


def cmd_check(args) -> int:
    try:
        cfg = load_run_config_file(args.config) if args.config else checks.default_check_config()
    except (ConfigError, ValueError) as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    results = checks.run_check_suite(cfg)
    failed = 0
    for name, ok, detail in results:
        print("%s %s%s" % ("PASS" if ok else "FAIL", name,
                           "" if ok else " (%s)" % detail))
        failed += 0 if ok else 1
    print("%d/%d checks passed" % (len(results) - failed, len(results)))
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neardgd",
        description="Decentralized nonconvex optimization simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep), ("check", cmd_check)):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--parallel", type=int, default=1,
                       help="worker processes for sweep")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
