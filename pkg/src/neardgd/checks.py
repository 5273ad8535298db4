"""Invariant/diagnostic check suite backing the `check` CLI subcommand."""

import math

import numpy as np

from .config import RunConfig
from .consensus import (ConsensusMatrix, ConsensusMatrixError, apply_consensus,
                        average_project, metropolis_weights)
from .diagnostics import lyapunov_grad, lyapunov_value
from .graph import build_ring
from .objective import finite_difference_grad
from .optimizer import DivergenceError, run


def default_check_config() -> RunConfig:
    cfg = RunConfig()
    cfg.n, cfg.p, cfg.index = 4, 2, 2
    cfg.problem_kind = "quartic"
    cfg.budget = 200
    from .optimizer import MethodSpec
    cfg.method = MethodSpec("near-dgd-t", t=2)
    return cfg


def _rel_err(a, b):
    denom = max(1.0, float(np.abs(b).max()))
    return float(np.abs(a - b).max()) / denom


def check_objective_gradients(problem, rng, points=20, step=1e-5, tol=1e-6):
    worst = 0.0
    for _ in range(points):
        x = rng.uniform(-1.0, 1.0, size=(problem.n, problem.p))
        fd = finite_difference_grad(problem.stacked_value, x, step)
        worst = max(worst, _rel_err(problem.stacked_grad(x), fd))
    return worst <= tol, "max rel err %.3g" % worst


def check_hessian_vector(problem, rng, points=10, step=1e-5, tol=1e-5):
    worst = 0.0
    for _ in range(points):
        i = int(rng.integers(problem.n))
        x = rng.uniform(-1.0, 1.0, size=problem.p)
        v = rng.normal(size=problem.p)
        hv = problem.local_hessian(i, x) @ v
        fd = (problem.local_grad(i, x + step * v) - problem.local_grad(i, x - step * v)) / (2 * step)
        worst = max(worst, _rel_err(hv, fd))
    return worst <= tol, "max rel err %.3g" % worst


def check_lyapunov_gradient(problem, cm, alpha, rng, points=10, step=1e-5, tol=1e-6):
    worst = 0.0
    for _ in range(points):
        y = rng.uniform(-1.0, 1.0, size=(problem.n, problem.p))
        for t in (1, 2):
            fd = finite_difference_grad(
                lambda v: lyapunov_value(v, problem, cm, t, alpha), y, step)
            worst = max(worst, _rel_err(lyapunov_grad(y, problem, cm, t, alpha), fd))
    return worst <= tol, "max rel err %.3g" % worst


def check_consensus_properties(cm, rng, tol=1e-12):
    n = cm.n
    problems = []
    for _ in range(5):
        y = rng.normal(size=(n, 3))
        z1 = apply_consensus(cm, 1, y)
        if np.linalg.norm(z1) > np.linalg.norm(y) + tol:
            problems.append("expansive")
        m = average_project(y)
        z3 = apply_consensus(cm, 3, y)
        if np.linalg.norm(z3 - m) > cm.beta**3 * np.linalg.norm(y - m) + tol:
            problems.append("contraction bound")
        if np.abs(apply_consensus(cm, 2, apply_consensus(cm, 1, y)) - z3).max() > tol:
            problems.append("composition")
        if np.abs(average_project(z3) - m).max() > 1e-11:
            problems.append("mean preservation")
    return not problems, ", ".join(sorted(set(problems)))


def check_pd_rejection():
    g = build_ring(4)
    w = metropolis_weights(g)  # lambda_1 = -1/3, not positive definite
    try:
        ConsensusMatrix(w, g)
    except ConsensusMatrixError:
        return True, ""
    return False, "indefinite matrix accepted"


def check_run_certificates(problem, cm, cfg):
    try:
        result = run(problem, cm, cfg.method, cfg.alpha, cfg.budget, seed=cfg.seed,
                     allow_large_alpha=cfg.allow_large_alpha, box_radius=cfg.box_radius)
    except DivergenceError as exc:
        detail = "run diverged: %s" % exc
        return [("descent-residual", False, detail),
                ("eq7-identity", False, detail),
                ("consensus-bound", False, detail)]
    worst_rel = -math.inf
    for rec in result.trace.records[:-1]:
        slack = 1e-10 * max(1.0, abs(rec.lyapunov))
        worst_rel = max(worst_rel, rec.descent_residual / slack)
    out = [("descent-residual", worst_rel <= 1.0,
            "worst residual/slack ratio %.3g" % worst_rel)]
    out.append(("eq7-identity", result.max_eq7_inf <= 1e-10,
                "max inf-norm %.3g" % result.max_eq7_inf))
    out.append(("consensus-bound", result.max_cons_gap <= 1e-12,
                "max gap %.3g" % result.max_cons_gap))
    return out


def run_check_suite(cfg: RunConfig):
    """Run every check on the configured instance; list of (name, ok, detail)."""
    rng = np.random.default_rng(12345)
    problem = cfg.build_problem()
    cm = cfg.build_consensus()
    results = []
    ok, detail = check_objective_gradients(problem, rng)
    results.append(("objective-gradient-fd", ok, detail))
    ok, detail = check_hessian_vector(problem, rng)
    results.append(("hessian-vector-fd", ok, detail))
    ok, detail = check_lyapunov_gradient(problem, cm, cfg.alpha, rng)
    results.append(("lyapunov-gradient-fd", ok, detail))
    ok, detail = check_consensus_properties(cm, rng)
    results.append(("consensus-properties", ok, detail))
    ok, detail = check_pd_rejection()
    results.append(("pd-shift-detection", ok, detail))
    results.extend(check_run_certificates(problem, cm, cfg))
    return results
