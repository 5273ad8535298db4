import numpy as np
import pytest
from hypothesis import given, strategies as st

from neardgd.graph import (Graph, TopologyError, build_erdos_renyi, build_ring,
                           build_star, degrees, from_edge_list, is_connected,
                           to_edge_list)


def test_ring_paper_size():
    g = build_ring(12)
    assert len(g.edges) == 12
    assert all(d == 2 for d in degrees(g))


def test_ring_triangle():
    assert build_ring(3).edges == frozenset({(0, 1), (1, 2), (0, 2)})


def test_ring_four():
    assert build_ring(4).edges == frozenset({(0, 1), (1, 2), (2, 3), (0, 3)})


def test_ring_too_small():
    with pytest.raises(TopologyError):
        build_ring(2)


def test_no_self_loops_or_duplicates():
    with pytest.raises(TopologyError):
        Graph(3, frozenset({(1, 1)}))
    g = Graph(3, frozenset({(0, 1), (1, 0)}))
    assert g.edges == frozenset({(0, 1)})


def test_connectivity():
    assert is_connected(build_ring(5))
    assert not is_connected(Graph(2, frozenset()))
    assert not is_connected(Graph(4, frozenset({(0, 1), (2, 3)})))


def test_degrees():
    assert list(degrees(build_ring(4))) == [2, 2, 2, 2]
    assert list(degrees(build_star(4))) == [3, 1, 1, 1]
    assert list(degrees(Graph(2, frozenset({(0, 1)})))) == [1, 1]


@given(st.integers(min_value=3, max_value=30))
def test_ring_connected_and_degree_sum(n):
    g = build_ring(n)
    assert is_connected(g)
    assert degrees(g).sum() == 2 * len(g.edges)


def test_erdos_renyi_connected_and_deterministic():
    g1 = build_erdos_renyi(8, 0.4, seed=5)
    g2 = build_erdos_renyi(8, 0.4, seed=5)
    assert g1.edges == g2.edges
    assert is_connected(g1)


def test_edge_list_round_trip():
    g = build_ring(5)
    text = to_edge_list(g)
    assert all(len(line.split()) == 2 for line in text.splitlines())
    assert from_edge_list(5, text).edges == g.edges
