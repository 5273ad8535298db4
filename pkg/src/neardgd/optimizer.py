"""Iteration engines: NEAR-DGD variants, DGD, and gradient tracking.

A run is strictly sequential; parallelism lives one level up (sweeps over
methods and seeds share no mutable state).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .consensus import CommCounter, ConsensusMatrix, apply_consensus
from .diagnostics import (CostModel, RunTrace, TraceRecord, consensus_distance,
                          cumulative_cost, rho_constant)
from .objective import Objective

DIVERGENCE_LIMIT = 1e12
INIT_BOUND = 1.0        # iterates start uniform in [-INIT_BOUND, INIT_BOUND]
BOX_INFLATION = 4.0     # trajectory box radius = INIT_BOUND * BOX_INFLATION

METHOD_NAMES = ("near-dgd-t", "near-dgd-plus", "near-dgd-plus-doubling",
                "dgd", "gradient-tracking")


class SteplengthError(ValueError):
    """alpha fails the descent condition alpha < 2/L."""


class DivergenceError(RuntimeError):
    """Trajectory left the asserted box; Lipschitz certificate is void."""


@dataclass(frozen=True)
class Schedule:
    """Consensus rounds per iteration: fixed t, t(k)=k+1, or periodic doubling."""

    kind: str  # "fixed" | "linear" | "doubling"
    t: int = 1
    period: int = 100
    start: int = 1

    def __post_init__(self):
        if self.kind not in ("fixed", "linear", "doubling"):
            raise ValueError("unknown schedule kind %r" % self.kind)
        if self.t < 1 or self.period < 1 or self.start < 1:
            raise ValueError("schedule parameters must be >= 1")

    def rounds(self, k: int) -> int:
        if self.kind == "fixed":
            return self.t
        if self.kind == "linear":
            return k + 1
        return self.start * 2 ** (k // self.period)


@dataclass(frozen=True)
class MethodSpec:
    name: str
    t: int = 1
    period: int = 100

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise ValueError("unknown method %r" % self.name)

    def schedule(self) -> Schedule:
        if self.name == "near-dgd-t":
            return Schedule("fixed", t=self.t)
        if self.name == "near-dgd-plus":
            return Schedule("linear")
        if self.name == "near-dgd-plus-doubling":
            return Schedule("doubling", period=self.period)
        return Schedule("fixed", t=1)  # baselines: one round per iteration

    def label(self) -> str:
        if self.name == "near-dgd-t":
            return "near-dgd-t:%d" % self.t
        if self.name == "near-dgd-plus-doubling":
            return "near-dgd-plus-doubling:%d" % self.period
        return self.name

    @staticmethod
    def parse(token: str) -> "MethodSpec":
        name, _, param = token.strip().partition(":")
        if name == "near-dgd-t":
            return MethodSpec(name, t=int(param) if param else 1)
        if name == "near-dgd-plus-doubling":
            return MethodSpec(name, period=int(param) if param else 100)
        if param:
            raise ValueError("method %r takes no parameter" % name)
        return MethodSpec(name)


# ---------------------------------------------------------------------------
# Single steps (the spec-level primitives; run() drives them with tracing)

def near_dgd_step(y, objective: Objective, cm: ConsensusMatrix, t: int,
                  alpha: float, counter: CommCounter):
    """One NEAR-DGD iteration: x = Z^t y, then y+ = x - a grad f(x)."""
    x = apply_consensus(cm, t, y, counter)
    g = objective.stacked_grad(x)
    counter.gradient_evals += 1
    return x, x - alpha * g


def dgd_step(x, objective: Objective, cm: ConsensusMatrix, alpha: float,
             counter: CommCounter):
    """One DGD iteration: x+ = Z x - a grad f(x); consensus fused with gradient."""
    g = objective.stacked_grad(x)
    counter.gradient_evals += 1
    return apply_consensus(cm, 1, x, counter) - alpha * g


def gradient_tracking_step(x, s, grad_x, objective: Objective,
                           cm: ConsensusMatrix, alpha: float, counter: CommCounter):
    """DIGing-form update with a tracked average-gradient estimate.

    x+ = Wx - a s;  s+ = Ws + grad f(x+) - grad f(x). The gradient at x+ is
    returned for caching, so steady state costs 2 comms + 1 grad.
    """
    x_next = apply_consensus(cm, 1, x, counter) - alpha * s
    grad_next = objective.stacked_grad(x_next)
    counter.gradient_evals += 1
    s_next = apply_consensus(cm, 1, s, counter) + grad_next - grad_x
    return x_next, s_next, grad_next


# ---------------------------------------------------------------------------
# Full runs

@dataclass
class RunResult:
    trace: RunTrace
    counter: CommCounter
    final_y: np.ndarray | None
    final_x: np.ndarray
    final_avg: np.ndarray
    b_y: float                    # trajectory max of the stacked iterate norm
    max_cons_gap: float           # max over iterations of cons_dist - beta^t ||y_k||
    max_eq7_inf: float            # fixed-t runs: worst Eq.-style identity violation
    lipschitz: float
    diverged: bool = False
    history: list | None = None   # optional (t, y_k, x_k) triples

    @property
    def final_avg_grad_norm(self) -> float:
        return self.trace.final.grad_avg_norm


def _validate_alpha(alpha, lipschitz, allow_large_alpha):
    if alpha <= 0:
        raise SteplengthError("alpha must be positive")
    if alpha >= 2.0 / lipschitz and not allow_large_alpha:
        raise SteplengthError(
            "alpha=%g violates alpha < 2/L with L=%g; pass allow_large_alpha "
            "to override (descent guarantees are then void)" % (alpha, lipschitz))


def initial_point(n, p, seed) -> np.ndarray:
    """Uniform draw in [-1, 1]^{np}; one stream per seed, shared across methods."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    return rng.uniform(-INIT_BOUND, INIT_BOUND, size=(n, p))


def run(objective: Objective, cm: ConsensusMatrix, method: MethodSpec,
        alpha: float, budget: int, seed: int = 0, cost_model: CostModel | None = None,
        f_star: float | None = None, grad_tol: float | None = None,
        allow_large_alpha: bool = False, box_radius: float | None = None,
        x0: np.ndarray | None = None, keep_history: bool = False) -> RunResult:
    """Execute one method until the gradient-evaluation budget (or tolerance).

    Trace row k describes iterate k; rows 0..K-1 carry the per-iteration
    Lyapunov value and descent residual (NEAR-DGD methods), the final row the
    terminal state. Deterministic for fixed seed and config.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    cost_model = cost_model or CostModel()
    n, p = objective.n, objective.p
    if box_radius is None:
        box_radius = INIT_BOUND * BOX_INFLATION
    lipschitz = objective.lipschitz_estimate(box_radius)
    _validate_alpha(alpha, lipschitz, allow_large_alpha)
    if f_star is None:
        f_star = objective.min_value() if hasattr(objective, "min_value") else 0.0

    y = initial_point(n, p, seed) if x0 is None else np.array(x0, dtype=float)
    if y.shape != (n, p):
        raise ValueError("initial point has shape %r, expected (%d, %d)" % (y.shape, n, p))

    counter = CommCounter()
    trace = RunTrace(method=method.label(), seed=int(seed))
    sched = method.schedule()
    is_near_dgd = method.name.startswith("near-dgd")
    rho_cache: dict[int, float] = {}
    inv2a = 1.0 / (2.0 * alpha)

    result = RunResult(trace=trace, counter=counter, final_y=None, final_x=y,
                       final_avg=y.mean(axis=0), b_y=float(np.linalg.norm(y)),
                       max_cons_gap=-math.inf, max_eq7_inf=0.0,
                       lipschitz=lipschitz, history=[] if keep_history else None)

    def point_metrics(avg):
        f_err = objective.global_value(avg) - f_star
        gnorm = float(np.linalg.norm(objective.global_grad(avg)))
        return f_err, gnorm, float(np.linalg.norm(avg))

    def guard(arr, note):
        if not np.all(np.isfinite(arr)) or np.abs(arr).max() > DIVERGENCE_LIMIT:
            result.diverged = True
            trace.diverged = True
            trace.divergence_note = note
            return True
        if np.abs(arr).max() > box_radius:
            raise DivergenceError(
                "trajectory left the box |x|_inf <= %g (%s); Lipschitz estimate "
                "no longer valid" % (box_radius, note))
        return False

    def lyap_from(z, v):
        # L_t(v) = f(Z^t v) + (1/2a)(<v, Z^t v> - ||Z^t v||^2), z = Z^t v
        return objective.stacked_value(z) + inv2a * float(np.vdot(v, z) - np.vdot(z, z))

    if is_near_dgd:
        k = 0
        cached_x = None  # Z^{t(k)} y when the previous diagnostics already built it
        while counter.gradient_evals < budget:
            t_k = sched.rounds(k)
            if cached_x is None:
                x = apply_consensus(cm, t_k, y)
                counter.consensus_rounds += t_k
            else:
                x = cached_x  # same product; the rounds still happen and are counted
                counter.consensus_rounds += t_k
            grad = objective.stacked_grad(x)
            counter.gradient_evals += 1
            y_next = x - alpha * grad

            result.b_y = max(result.b_y, float(np.linalg.norm(y_next)))
            cons = consensus_distance(x)
            result.max_cons_gap = max(
                result.max_cons_gap, cons - cm.beta**t_k * float(np.linalg.norm(y)))

            lyap = lyap_from(x, y)
            z_next = apply_consensus(cm, t_k, y_next)  # uncounted diagnostic
            if t_k not in rho_cache:
                try:
                    rho_cache[t_k] = rho_constant(cm, t_k, alpha, lipschitz)
                except ValueError:
                    # alpha >= 2/L under the override flag: no guaranteed
                    # margin, report the raw Lyapunov difference
                    rho_cache[t_k] = 0.0
            dy = y_next - y
            residual = lyap_from(z_next, y_next) - lyap + rho_cache[t_k] * float(np.vdot(dy, dy))
            if sched.kind == "fixed":
                # x_{k+1} - x_k vs -a grad L_t(y_k), assembled from reused pieces
                grad_lyap = apply_consensus(cm, t_k, grad) + (x - apply_consensus(cm, t_k, x)) / alpha
                result.max_eq7_inf = max(result.max_eq7_inf, float(
                    np.abs(z_next - x + alpha * grad_lyap).max()))

            avg = x.mean(axis=0)
            f_err, gnorm, dist0 = point_metrics(avg)
            trace.append(TraceRecord(k, t_k, counter.consensus_rounds,
                                     counter.gradient_evals, f_err, gnorm, cons,
                                     lyap, residual, dist0,
                                     cumulative_cost(counter, cost_model)))
            if result.history is not None:
                result.history.append((t_k, y.copy(), x.copy()))

            if guard(y_next, "iteration %d" % k):
                break
            y = y_next
            cached_x = z_next if sched.rounds(k + 1) == t_k else None
            k += 1
            if grad_tol is not None and gnorm <= grad_tol:
                break
        # terminal row: state y_k, consensus not yet performed
        t_k = sched.rounds(k)
        avg = y.mean(axis=0)
        f_err, gnorm, dist0 = point_metrics(avg)
        z = cached_x if cached_x is not None else apply_consensus(cm, t_k, y)
        trace.append(TraceRecord(k, t_k, counter.consensus_rounds,
                                 counter.gradient_evals, f_err, gnorm,
                                 consensus_distance(y), lyap_from(z, y),
                                 math.nan, dist0,
                                 cumulative_cost(counter, cost_model)))
        result.final_y = y
        result.final_x = z
        result.final_avg = avg
        return result

    # baselines: single x-state methods
    x = y
    s = None
    grad_x = None
    k = 0
    while counter.gradient_evals < budget:
        if method.name == "gradient-tracking":
            if s is None:
                if budget - counter.gradient_evals < 2:
                    break  # not enough budget for tracker init plus a step
                grad_x = objective.stacked_grad(x)
                counter.gradient_evals += 1
                s = grad_x
            x_prev = x
            x_next, s, grad_x = gradient_tracking_step(x, s, grad_x, objective,
                                                       cm, alpha, counter)
        else:
            x_prev = x
            x_next = dgd_step(x, objective, cm, alpha, counter)

        cons = consensus_distance(x_prev)
        avg = x_prev.mean(axis=0)
        f_err, gnorm, dist0 = point_metrics(avg)
        trace.append(TraceRecord(k, 1, counter.consensus_rounds,
                                 counter.gradient_evals, f_err, gnorm, cons,
                                 math.nan, math.nan, dist0,
                                 cumulative_cost(counter, cost_model)))
        if result.history is not None:
            result.history.append((1, x_prev.copy(), x_prev.copy()))
        result.b_y = max(result.b_y, float(np.linalg.norm(x_next)))
        if guard(x_next, "iteration %d" % k):
            break
        x = x_next
        k += 1
        if grad_tol is not None and gnorm <= grad_tol:
            break

    avg = x.mean(axis=0)
    f_err, gnorm, dist0 = point_metrics(avg)
    trace.append(TraceRecord(k, 1, counter.consensus_rounds,
                             counter.gradient_evals, f_err, gnorm,
                             consensus_distance(x), math.nan, math.nan, dist0,
                             cumulative_cost(counter, cost_model)))
    result.final_y = x
    result.final_x = x
    result.final_avg = avg
    return result
