"""Consensus weight matrices and multi-round averaging on stacked iterates.

Stacked iterates are ndarrays of shape (n, p): row i is node i's local
p-vector. The node-major flattening (`to_stacked`) matches the np-length
vector convention used in configs and traces.
"""

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, degrees, is_connected
from .linalg import check_symmetric, sym_eigen

STOCH_TOL = 1e-12


class ConsensusMatrixError(ValueError):
    """Weight matrix violates a consensus-matrix requirement."""


@dataclass
class CommCounter:
    """Cumulative communication/computation tallies for one run."""

    consensus_rounds: int = 0
    gradient_evals: int = 0


def metropolis_weights(g: Graph) -> np.ndarray:
    """Metropolis-Hastings weights: w_ij = 1/(1 + max(d_i, d_j)) on edges.

    Symmetric and doubly stochastic with the graph's sparsity pattern, but
    not necessarily positive definite.
    """
    if not is_connected(g):
        raise ConsensusMatrixError("graph must be connected")
    d = degrees(g)
    w = np.zeros((g.n, g.n))
    for (i, j) in g.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(d[i], d[j]))
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return w


def max_degree_weights(g: Graph) -> np.ndarray:
    """Max-degree weights: w_ij = 1/(1 + max_k d_k) on edges, diagonal residual."""
    if not is_connected(g):
        raise ConsensusMatrixError("graph must be connected")
    off = 1.0 / (1.0 + degrees(g).max())
    w = np.zeros((g.n, g.n))
    for (i, j) in g.edges:
        w[i, j] = w[j, i] = off
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return w


WEIGHT_RULES = {"metropolis": metropolis_weights, "maxdegree": max_degree_weights}


@dataclass
class ConsensusMatrix:
    """Symmetric doubly stochastic positive-definite weight matrix.

    The spectrum is computed once at construction; beta is the second
    largest eigenvalue (the consensus contraction factor) and lambda_min
    the smallest.
    """

    W: np.ndarray
    graph: Graph
    beta: float = field(init=False)
    lambda_min: float = field(init=False)
    eigenvalues: np.ndarray = field(init=False)
    eigenvectors: np.ndarray = field(init=False)

    def __post_init__(self):
        self.W = check_symmetric(self.W)
        _check_consensus_invariants(self.W, self.graph)
        spec = sym_eigen(self.W)
        self.eigenvalues = spec.eigenvalues
        self.eigenvectors = spec.eigenvectors
        self.lambda_min = float(spec.eigenvalues[0])
        self.beta = float(spec.eigenvalues[-2]) if self.W.shape[0] > 1 else 0.0
        if self.lambda_min <= 0:
            raise ConsensusMatrixError(
                "matrix not positive definite (lambda_min=%g)" % self.lambda_min
            )
        if not (0.0 <= self.beta < 1.0):
            raise ConsensusMatrixError("beta=%g outside [0, 1)" % self.beta)

    @property
    def n(self):
        return self.W.shape[0]


def _check_consensus_invariants(w, g: Graph):
    n = w.shape[0]
    if n != g.n:
        raise ConsensusMatrixError("matrix size %d != graph size %d" % (n, g.n))
    if np.any(w < -STOCH_TOL):
        raise ConsensusMatrixError("negative entries")
    rows = w.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > STOCH_TOL):
        raise ConsensusMatrixError("rows do not sum to 1")
    for i in range(n):
        for j in range(i + 1, n):
            on_edge = (i, j) in g.edges
            if on_edge and w[i, j] <= 0:
                raise ConsensusMatrixError("zero weight on edge (%d,%d)" % (i, j))
            if not on_edge and w[i, j] != 0:
                raise ConsensusMatrixError("nonzero weight off edge (%d,%d)" % (i, j))


def ensure_positive_definite(w_tilde, g: Graph, margin: float = 0.1) -> ConsensusMatrix:
    """Shift a symmetric doubly stochastic matrix into the positive-definite cone.

    If lambda_1 > 0 the matrix is returned unchanged; otherwise applies
    W = (W~ - delta*I) / (1 - delta) with delta = lambda_1 - margin, which
    keeps rows stochastic and eigenvectors intact while moving lambda_1 to
    margin / (1 - delta) > 0.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    w_tilde = check_symmetric(w_tilde)
    lam1 = sym_eigen(w_tilde).eigenvalues[0]
    if lam1 > 0:
        return ConsensusMatrix(w_tilde.copy(), g)
    delta = lam1 - margin
    w = (w_tilde - delta * np.eye(w_tilde.shape[0])) / (1.0 - delta)
    off = w[~np.eye(w.shape[0], dtype=bool)]
    assert np.all(off >= 0.0), "shift produced a negative off-diagonal entry"
    return ConsensusMatrix(w, g)


def build_consensus_matrix(g: Graph, rule: str = "metropolis", margin: float = 0.1) -> ConsensusMatrix:
    """Weight-rule construction followed by the positive-definite shift."""
    try:
        base = WEIGHT_RULES[rule]
    except KeyError:
        raise ConsensusMatrixError("unknown weight rule %r" % rule) from None
    return ensure_positive_definite(base(g), g, margin)


def apply_consensus(cm: ConsensusMatrix, t: int, y, counter: CommCounter | None = None):
    """t successive block applications of W to a stacked iterate (never W^t).

    Each of the t rounds is one communication; the counter advances by t.
    """
    if t < 1:
        raise ValueError("consensus rounds t must be >= 1")
    y = np.asarray(y, dtype=float)
    if y.shape[0] != cm.n:
        raise ValueError("iterate has %d node rows, matrix expects %d" % (y.shape[0], cm.n))
    out = y
    for _ in range(t):
        out = cm.W @ out
    if counter is not None:
        counter.consensus_rounds += t
    return out


def average_project(y):
    """Replace every node slice with the across-node mean (the M operator)."""
    y = np.asarray(y, dtype=float)
    return np.broadcast_to(y.mean(axis=0), y.shape).copy()


def to_stacked(y) -> np.ndarray:
    """Node-major flattening (n, p) -> (n*p,)."""
    return np.asarray(y, dtype=float).reshape(-1)


def from_stacked(v, n: int, p: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size != n * p:
        raise ValueError("stacked vector length %d != n*p = %d" % (v.size, n * p))
    return v.reshape(n, p)
