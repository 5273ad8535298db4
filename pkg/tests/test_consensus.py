import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neardgd.consensus import (CommCounter, ConsensusMatrix,
                               ConsensusMatrixError, apply_consensus,
                               average_project, build_consensus_matrix,
                               ensure_positive_definite, from_stacked,
                               max_degree_weights, metropolis_weights,
                               to_stacked)
from neardgd.graph import Graph, build_erdos_renyi, build_ring, build_star
from neardgd.linalg import sym_eigen


def two_node_cm():
    g = Graph(2, frozenset({(0, 1)}))
    return ConsensusMatrix(np.array([[0.6, 0.4], [0.4, 0.6]]), g)


def test_metropolis_ring4():
    w = metropolis_weights(build_ring(4))
    assert w[0, 1] == pytest.approx(1 / 3)
    assert w[0, 0] == pytest.approx(1 / 3)
    assert w[0, 2] == 0.0


def test_metropolis_single_edge():
    w = metropolis_weights(Graph(2, frozenset({(0, 1)})))
    np.testing.assert_allclose(w, [[0.5, 0.5], [0.5, 0.5]])


def test_metropolis_star3():
    w = metropolis_weights(build_star(3))
    assert w[0, 1] == pytest.approx(1 / 3)
    assert w[0, 2] == pytest.approx(1 / 3)
    assert w[0, 0] == pytest.approx(1 / 3)
    assert w[1, 1] == pytest.approx(2 / 3)
    assert w[2, 2] == pytest.approx(2 / 3)


def test_metropolis_rejects_disconnected():
    with pytest.raises(ConsensusMatrixError):
        metropolis_weights(Graph(4, frozenset({(0, 1), (2, 3)})))


def test_max_degree_star3():
    w = max_degree_weights(build_star(3))
    assert w[0, 1] == pytest.approx(1 / 3)
    assert w[1, 1] == pytest.approx(2 / 3)


def test_ensure_pd_ring4_shift():
    g = build_ring(4)
    cm = ensure_positive_definite(metropolis_weights(g), g, margin=0.1)
    # affine spectral map with delta = -1/3 - 0.1
    np.testing.assert_allclose(cm.eigenvalues, [3 / 43, 23 / 43, 23 / 43, 1.0],
                               atol=1e-12)
    assert cm.beta == pytest.approx(23 / 43, abs=1e-12)
    assert cm.lambda_min == pytest.approx(3 / 43, abs=1e-12)


def test_ensure_pd_noop_when_already_pd():
    cm0 = two_node_cm()
    cm = ensure_positive_definite(cm0.W, cm0.graph, margin=0.1)
    np.testing.assert_allclose(cm.W, cm0.W)


def test_ensure_pd_two_node_complete_mixing():
    g = Graph(2, frozenset({(0, 1)}))
    cm = ensure_positive_definite(np.full((2, 2), 0.5), g, margin=0.1)
    np.testing.assert_allclose(cm.W, [[6 / 11, 5 / 11], [5 / 11, 6 / 11]], atol=1e-12)
    np.testing.assert_allclose(cm.eigenvalues, [1 / 11, 1.0], atol=1e-12)


def test_constructor_rejects_indefinite():
    g = build_ring(4)
    with pytest.raises(ConsensusMatrixError):
        ConsensusMatrix(metropolis_weights(g), g)


def test_apply_consensus_examples():
    cm = two_node_cm()
    counter = CommCounter()
    y = np.array([[1.0], [-1.0]])
    x = apply_consensus(cm, 1, y, counter)
    np.testing.assert_allclose(x, [[0.2], [-0.2]], atol=1e-15)
    x2 = apply_consensus(cm, 2, y, counter)
    np.testing.assert_allclose(x2, [[0.04], [-0.04]], atol=1e-15)
    assert counter.consensus_rounds == 3


def test_apply_consensus_fixed_on_consensus_subspace():
    cm = build_consensus_matrix(build_ring(5))
    v = np.array([1.5, -2.0, 0.25])
    y = np.tile(v, (5, 1))
    np.testing.assert_allclose(apply_consensus(cm, 7, y), y, atol=1e-12)


def test_average_project_examples():
    np.testing.assert_allclose(average_project(np.array([[1.0], [-1.0]])), [[0.0], [0.0]])
    y = np.array([[2.0], [4.0], [6.0]])
    np.testing.assert_allclose(average_project(y), [[4.0], [4.0], [4.0]])
    c = np.tile([1.0, 2.0], (3, 1))
    np.testing.assert_allclose(average_project(c), c)


def random_connected_graphs(count=20):
    graphs = []
    i = 0
    while len(graphs) < count:
        n = 3 + (i % 8)
        graphs.append(build_erdos_renyi(n, 0.5, seed=100 + i))
        i += 1
    return graphs


@pytest.mark.parametrize("rule", ["metropolis", "maxdegree"])
def test_invariant_suite_on_random_graphs(rule):
    for g in random_connected_graphs():
        cm = build_consensus_matrix(g, rule=rule)
        w = cm.W
        assert np.abs(w - w.T).max() <= 1e-12
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(w.sum(axis=0), 1.0, atol=1e-12)
        assert w.min() >= -1e-12
        for i in range(g.n):
            for j in range(i + 1, g.n):
                assert (w[i, j] > 0) == ((i, j) in g.edges)
        assert cm.lambda_min > 0
        assert 0 <= cm.beta < 1
        assert cm.eigenvalues[-1] == pytest.approx(1.0, abs=1e-12)
        # eigenvector of eigenvalue 1 is the all-ones direction
        ones = np.ones(g.n) / np.sqrt(g.n)
        np.testing.assert_allclose(w @ ones, ones, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=4))
def test_contraction_and_nonexpansiveness(seed, t):
    cm = build_consensus_matrix(build_ring(6))
    rng = np.random.default_rng(seed)
    y = rng.normal(size=(6, 2))
    z = apply_consensus(cm, t, y)
    assert np.linalg.norm(z) <= np.linalg.norm(y) + 1e-12
    m = average_project(y)
    assert np.linalg.norm(z - m) <= cm.beta**t * np.linalg.norm(y - m) + 1e-12


def test_composition_and_mean_commute():
    cm = build_consensus_matrix(build_ring(7))
    rng = np.random.default_rng(3)
    y = rng.normal(size=(7, 3))
    a = apply_consensus(cm, 5, y)
    b = apply_consensus(cm, 2, apply_consensus(cm, 3, y))
    np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(average_project(a), average_project(y), atol=1e-12)


def test_blockwise_equals_kronecker_operator():
    from neardgd.linalg import kron_identity
    cm = build_consensus_matrix(build_ring(4))
    rng = np.random.default_rng(8)
    for p in (1, 2):
        y = rng.normal(size=(4, p))
        z = kron_identity(cm.W @ cm.W @ cm.W, p) @ to_stacked(y)
        np.testing.assert_allclose(to_stacked(apply_consensus(cm, 3, y)), z, atol=1e-12)


def test_stacked_round_trip():
    y = np.arange(12.0).reshape(4, 3)
    np.testing.assert_array_equal(from_stacked(to_stacked(y), 4, 3), y)
    with pytest.raises(ValueError):
        from_stacked(np.zeros(5), 2, 3)
