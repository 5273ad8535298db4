import numpy as np
import pytest

from neardgd.consensus import CommCounter, ConsensusMatrix, build_consensus_matrix
from neardgd.diagnostics import CostModel
from neardgd.graph import Graph, build_ring
from neardgd.objective import QuadraticProblem, sample_quartic_problem
from neardgd.optimizer import (DivergenceError, MethodSpec, Schedule,
                               SteplengthError, dgd_step,
                               gradient_tracking_step, initial_point,
                               near_dgd_step, run)


def two_node_instance():
    """n=2, p=1, f_i(x) = x^2/2, W = [[0.6,0.4],[0.4,0.6]]."""
    g = Graph(2, frozenset({(0, 1)}))
    cm = ConsensusMatrix(np.array([[0.6, 0.4], [0.4, 0.6]]), g)
    return QuadraticProblem(np.zeros((2, 1))), cm


def paper_instance():
    prob = sample_quartic_problem(12, 4, 4, 1.0, seed=0)
    cm = build_consensus_matrix(build_ring(12))
    return prob, cm


# ---------------------------------------------------------------------------
# Schedules and method specs

def test_schedule_fixed_linear_doubling():
    assert [Schedule("fixed", t=5).rounds(k) for k in (0, 3, 99)] == [5, 5, 5]
    assert [Schedule("linear").rounds(k) for k in (0, 1, 9)] == [1, 2, 10]
    dbl = Schedule("doubling", period=100)
    assert [dbl.rounds(k) for k in (0, 99, 100, 199, 200)] == [1, 1, 2, 2, 4]
    with pytest.raises(ValueError):
        Schedule("exp")
    with pytest.raises(ValueError):
        Schedule("fixed", t=0)


def test_method_spec_labels_and_parse():
    assert MethodSpec("near-dgd-t", t=5).label() == "near-dgd-t:5"
    assert MethodSpec("dgd").label() == "dgd"
    assert MethodSpec.parse("near-dgd-t:10") == MethodSpec("near-dgd-t", t=10)
    assert MethodSpec.parse("near-dgd-plus-doubling:50").period == 50
    assert MethodSpec.parse("gradient-tracking").name == "gradient-tracking"
    with pytest.raises(ValueError):
        MethodSpec.parse("dgd:3")
    with pytest.raises(ValueError):
        MethodSpec("polyak")


# ---------------------------------------------------------------------------
# Step primitives: hand-iteration values

def test_near_dgd_step_hand_example():
    prob, cm = two_node_instance()
    counter = CommCounter()
    y0 = np.array([[1.0], [-1.0]])
    x0, y1 = near_dgd_step(y0, prob, cm, 1, 0.1, counter)
    np.testing.assert_allclose(x0, [[0.2], [-0.2]], atol=1e-15)
    np.testing.assert_allclose(y1, [[0.18], [-0.18]], atol=1e-15)
    assert (counter.consensus_rounds, counter.gradient_evals) == (1, 1)

    x0, y1 = near_dgd_step(y0, prob, cm, 2, 0.1, counter)
    np.testing.assert_allclose(x0, [[0.04], [-0.04]], atol=1e-15)
    np.testing.assert_allclose(y1, [[0.036], [-0.036]], atol=1e-15)
    assert (counter.consensus_rounds, counter.gradient_evals) == (3, 2)


def test_near_dgd_consensual_start_stays_consensual():
    # identical f_i: every node takes the same step, consensus is invariant
    cm = build_consensus_matrix(build_ring(5))
    prob = QuadraticProblem(np.tile([0.3, -0.7], (5, 1)))
    y0 = np.tile([1.0, 1.0], (5, 1))
    x0, y1 = near_dgd_step(y0, prob, cm, 3, 0.1, CommCounter())
    np.testing.assert_allclose(x0, y0, atol=1e-12)
    assert np.abs(y1 - y1.mean(axis=0)).max() <= 1e-12
    # at the shared minimizer the consensual point is fixed
    ym = np.tile([0.3, -0.7], (5, 1))
    xm, ym1 = near_dgd_step(ym, prob, cm, 2, 0.1, CommCounter())
    np.testing.assert_allclose(ym1, ym, atol=1e-12)


def test_dgd_step_hand_example():
    prob, cm = two_node_instance()
    counter = CommCounter()
    x1 = dgd_step(np.array([[1.0], [-1.0]]), prob, cm, 0.1, counter)
    np.testing.assert_allclose(x1, [[0.1], [-0.1]], atol=1e-15)
    assert (counter.consensus_rounds, counter.gradient_evals) == (1, 1)


def test_dgd_fixed_point_and_pure_consensus():
    prob, cm = two_node_instance()
    zero = np.zeros((2, 1))
    np.testing.assert_allclose(dgd_step(zero, prob, cm, 0.1, CommCounter()), zero)
    # alpha = 0 degenerates to a consensus iteration
    x = np.array([[1.0], [3.0]])
    for _ in range(200):
        x = cm.W @ x - 0.0 * prob.stacked_grad(x)
    np.testing.assert_allclose(x, [[2.0], [2.0]], atol=1e-10)


def test_gradient_tracking_hand_example():
    prob, cm = two_node_instance()
    counter = CommCounter()
    x0 = np.array([[1.0], [-1.0]])
    s0 = prob.stacked_grad(x0)
    np.testing.assert_allclose(s0, [[1.0], [-1.0]])
    x1, s1, g1 = gradient_tracking_step(x0, s0, s0, prob, cm, 0.1, counter)
    np.testing.assert_allclose(x1, [[0.1], [-0.1]], atol=1e-15)
    np.testing.assert_allclose(s1, [[-0.7], [0.7]], atol=1e-15)
    np.testing.assert_allclose(g1, prob.stacked_grad(x1))
    assert (counter.consensus_rounds, counter.gradient_evals) == (2, 1)


def test_gradient_tracking_identity_after_random_steps():
    prob, cm = paper_instance()
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, size=(12, 4))
    g = prob.stacked_grad(x)
    s = g
    for _ in range(10):
        x, s, g = gradient_tracking_step(x, s, g, prob, cm, 0.1, CommCounter())
        # tracking identity: mean of s equals mean of grad f(x)
        err = np.abs(s.mean(axis=0) - g.mean(axis=0)).max()
        assert err <= 1e-12


def test_gradient_tracking_consensual_minimizer_fixed():
    prob, cm = two_node_instance()
    x = np.zeros((2, 1))
    g = prob.stacked_grad(x)
    x1, s1, _ = gradient_tracking_step(x, g, g, prob, cm, 0.1, CommCounter())
    np.testing.assert_allclose(x1, x, atol=1e-15)
    np.testing.assert_allclose(s1, np.zeros((2, 1)), atol=1e-15)


# ---------------------------------------------------------------------------
# Full runs

def test_run_counter_accounting_fixed_t5():
    prob, cm = paper_instance()
    res = run(prob, cm, MethodSpec("near-dgd-t", t=5), alpha=0.1, budget=100,
              cost_model=CostModel(1.0, 1.0))
    assert res.counter.gradient_evals == 100
    assert res.counter.consensus_rounds == 500
    assert res.trace.final.cost == pytest.approx(600.0)
    # 100 iteration rows plus the terminal row
    assert len(res.trace.records) == 101
    assert res.trace.final.k == 100
    assert all(rec.t_k == 5 for rec in res.trace.records)
    res2 = run(prob, cm, MethodSpec("near-dgd-t", t=5), alpha=0.1, budget=100,
               cost_model=CostModel(0.01, 1.0))
    assert res2.trace.final.cost == pytest.approx(105.0)


def test_run_zero_budget_single_record():
    prob, cm = paper_instance()
    for name in ("near-dgd-t", "dgd", "gradient-tracking"):
        res = run(prob, cm, MethodSpec(name), alpha=0.1, budget=0)
        assert len(res.trace.records) == 1
        rec = res.trace.final
        assert rec.k == 0 and rec.comms == 0 and rec.grads == 0


def test_run_deterministic_and_shared_initial_point():
    prob, cm = paper_instance()
    a = run(prob, cm, MethodSpec("near-dgd-t", t=2), alpha=0.1, budget=20, seed=3)
    b = run(prob, cm, MethodSpec("near-dgd-t", t=2), alpha=0.1, budget=20, seed=3)
    np.testing.assert_array_equal(a.final_y, b.final_y)
    x0 = initial_point(12, 4, 3)
    assert np.abs(x0).max() <= 1.0
    np.testing.assert_array_equal(initial_point(12, 4, 3), x0)
    assert not np.array_equal(initial_point(12, 4, 4), x0)


def test_run_gradient_tracking_accounting():
    prob, cm = paper_instance()
    res = run(prob, cm, MethodSpec("gradient-tracking"), alpha=0.1, budget=50)
    # one extra gradient eval initializes the tracker; 2 comms per iteration
    assert res.counter.gradient_evals == 50
    assert res.counter.consensus_rounds == 2 * 49


def test_run_near_dgd_plus_counts_triangular_comms():
    prob, cm = paper_instance()
    res = run(prob, cm, MethodSpec("near-dgd-plus"), alpha=0.1, budget=10)
    assert res.counter.gradient_evals == 10
    assert res.counter.consensus_rounds == sum(range(1, 11))
    assert [rec.t_k for rec in res.trace.records][:10] == list(range(1, 11))


def test_run_quadratic_near_dgd_plus_converges_exactly():
    cm = build_consensus_matrix(build_ring(6))
    rng = np.random.default_rng(5)
    prob = QuadraticProblem(rng.uniform(-1, 1, size=(6, 2)))
    res = run(prob, cm, MethodSpec("near-dgd-plus"), alpha=0.5, budget=200)
    assert np.linalg.norm(res.final_avg - prob.minimizer()) <= 1e-8
    assert res.final_avg_grad_norm <= 1e-8


def test_run_average_iterate_identity():
    prob, cm = paper_instance()
    res = run(prob, cm, MethodSpec("near-dgd-t", t=3), alpha=0.1, budget=30,
              keep_history=True)
    for t_k, y_k, x_k in res.history:
        np.testing.assert_allclose(x_k.mean(axis=0), y_k.mean(axis=0), atol=1e-12)


def test_run_descent_and_eq7_certificates():
    prob, cm = paper_instance()
    res = run(prob, cm, MethodSpec("near-dgd-t", t=2), alpha=0.1, budget=300)
    residuals = [rec.descent_residual for rec in res.trace.records[:-1]]
    assert max(residuals) <= 1e-10
    assert res.max_eq7_inf <= 1e-10
    assert res.max_cons_gap <= 1e-10


def test_run_steplength_validation():
    prob, cm = paper_instance()
    big = 2.0 / prob.lipschitz_estimate(4.0) + 0.1
    with pytest.raises(SteplengthError):
        run(prob, cm, MethodSpec("dgd"), alpha=big, budget=10)
    with pytest.raises(SteplengthError):
        run(prob, cm, MethodSpec("dgd"), alpha=-0.1, budget=10)
    # override flag lets the run proceed (it may then diverge or leave the box)
    try:
        res = run(prob, cm, MethodSpec("dgd"), alpha=big, budget=50,
                  allow_large_alpha=True, box_radius=1e11)
        assert res.trace.records
    except DivergenceError:
        pass


def test_run_divergence_guard_box():
    prob, cm = paper_instance()
    x0 = np.full((12, 4), 5.0)
    with pytest.raises(DivergenceError):
        run(prob, cm, MethodSpec("near-dgd-t", t=1), alpha=0.1, budget=50, x0=x0)


def test_run_grad_tol_stops_early():
    prob, cm = paper_instance()
    res = run(prob, cm, MethodSpec("near-dgd-plus"), alpha=0.1, budget=3000,
              grad_tol=1e-6)
    assert res.counter.gradient_evals < 3000
    assert res.final_avg_grad_norm <= 1e-6


def test_run_rejects_bad_inputs():
    prob, cm = paper_instance()
    with pytest.raises(ValueError):
        run(prob, cm, MethodSpec("dgd"), alpha=0.1, budget=-1)
    with pytest.raises(ValueError):
        run(prob, cm, MethodSpec("dgd"), alpha=0.1, budget=5, x0=np.zeros((3, 4)))
