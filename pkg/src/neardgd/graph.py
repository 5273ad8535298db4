"""Undirected communication topologies for consensus networks."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np


class TopologyError(ValueError):
    """Raised for invalid or unusable graph specifications."""


def _canonical(i, j):
    if i == j:
        raise TopologyError("self-loop at node %d" % i)
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1.

    Edges are stored canonically as (min, max) pairs; construction rejects
    self-loops and out-of-range endpoints.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise TopologyError("node count must be positive")
        canon = set()
        for (i, j) in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise TopologyError("edge (%d,%d) out of range for n=%d" % (i, j, self.n))
            canon.add(_canonical(i, j))
        object.__setattr__(self, "edges", frozenset(canon))

    def neighbors(self, i):
        return sorted(
            (j if a == i else a) for (a, j) in self.edges if i in (a, j)
        )


def degrees(g: Graph) -> np.ndarray:
    """Per-node edge counts."""
    d = np.zeros(g.n, dtype=int)
    for (i, j) in g.edges:
        d[i] += 1
        d[j] += 1
    return d


def is_connected(g: Graph) -> bool:
    """Breadth-first search from node 0 reaches every node."""
    if g.n == 1:
        return True
    adj = [[] for _ in range(g.n)]
    for (i, j) in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == g.n


def build_ring(n: int) -> Graph:
    """Cycle graph on n >= 3 nodes; every node has degree 2."""
    if n < 3:
        raise TopologyError("ring requires n >= 3, got n=%d" % n)
    return Graph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def build_star(n: int, center: int = 0) -> Graph:
    """Star graph: every node connected to the center."""
    if n < 2:
        raise TopologyError("star requires n >= 2, got n=%d" % n)
    if not 0 <= center < n:
        raise TopologyError("center %d out of range" % center)
    return Graph(n, frozenset((center, i) for i in range(n) if i != center))


def build_erdos_renyi(n: int, prob: float, seed, max_tries: int = 200) -> Graph:
    """G(n, prob) resampled until connected (bounded retries)."""
    if n < 2 or not 0.0 <= prob <= 1.0:
        raise TopologyError("invalid Erdos-Renyi parameters n=%d, prob=%r" % (n, prob))
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        edges = frozenset(
            (i, j) for i in range(n) for j in range(i + 1, n) if rng.uniform() < prob
        )
        g = Graph(n, edges)
        if is_connected(g):
            return g
    raise TopologyError(
        "no connected G(%d, %g) sample within %d tries" % (n, prob, max_tries)
    )


def to_edge_list(g: Graph) -> str:
    """Serialize as one 'i j' pair per line, sorted."""
    return "\n".join("%d %d" % e for e in sorted(g.edges))


def from_edge_list(n: int, text: str) -> Graph:
    edges = set()
    for line in text.strip().splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TopologyError("malformed edge line: %r" % line)
        edges.add((int(parts[0]), int(parts[1])))
    return Graph(n, frozenset(edges))
