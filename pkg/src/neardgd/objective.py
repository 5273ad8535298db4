"""Separable objectives: per-node values, gradients, Hessians, Lipschitz bounds.

The stacked objective is f(x) = sum_i f_i(x_i) over an (n, p) iterate; the
network-wide function evaluated at a single point is f(v) = sum_i f_i(v).
"""

from dataclasses import dataclass

import numpy as np


class ObjectiveError(ValueError):
    pass


class Objective:
    """Bundle of per-node evaluators for a separable objective.

    Subclasses implement local_value/local_grad/local_hessian and
    lipschitz_estimate. Stacked evaluators and single-point aggregates are
    derived here.
    """

    n: int
    p: int

    def local_value(self, i: int, x) -> float:
        raise NotImplementedError

    def local_grad(self, i: int, x) -> np.ndarray:
        raise NotImplementedError

    def local_hessian(self, i: int, x) -> np.ndarray:
        raise NotImplementedError

    def lipschitz_estimate(self, radius: float) -> float:
        raise NotImplementedError

    # stacked evaluators over (n, p) iterates

    def stacked_value(self, x) -> float:
        x = self._check_stacked(x)
        return float(sum(self.local_value(i, x[i]) for i in range(self.n)))

    def stacked_grad(self, x) -> np.ndarray:
        x = self._check_stacked(x)
        return np.stack([self.local_grad(i, x[i]) for i in range(self.n)])

    def stacked_hessian(self, x) -> np.ndarray:
        """Block-diagonal np x np Hessian; diagnostics-scale sizes only."""
        x = self._check_stacked(x)
        h = np.zeros((self.n * self.p, self.n * self.p))
        for i in range(self.n):
            sl = slice(i * self.p, (i + 1) * self.p)
            h[sl, sl] = self.local_hessian(i, x[i])
        return h

    # aggregates of the network-wide f at one p-dimensional point

    def global_value(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(sum(self.local_value(i, v) for i in range(self.n)))

    def global_grad(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.sum([self.local_grad(i, v) for i in range(self.n)], axis=0)

    def global_hessian(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.sum([self.local_hessian(i, v) for i in range(self.n)], axis=0)

    def _check_stacked(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n, self.p):
            raise ObjectiveError("expected shape (%d, %d), got %r" % (self.n, self.p, x.shape))
        return x


@dataclass
class QuadraticQuarticProblem(Objective):
    """Diagonal quadratics plus a quartic along one coordinate.

    f_i(x) = 1/2 x'Q^i x + (c^2 / 4n) * x_I^4, with q^i_II < 0 and the
    remaining diagonal entries positive, so the network objective has a
    strict saddle at the origin and two symmetric minimizers along e_I.
    ``index`` is 1-based.
    """

    q: np.ndarray  # (n, p) diagonals of the Q^i
    index: int
    c: float

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.n, self.p = self.q.shape
        if not 1 <= self.index <= self.p:
            raise ObjectiveError("index %d outside 1..%d" % (self.index, self.p))
        if self.c <= 0:
            raise ObjectiveError("c must be positive")
        ii = self.index - 1
        if np.any(self.q[:, ii] >= 0):
            raise ObjectiveError("q^i_II must be negative at the quartic coordinate")
        others = np.delete(self.q, ii, axis=1)
        if others.size and np.any(others <= 0):
            raise ObjectiveError("off-index diagonal entries must be positive")

    @property
    def _ii(self):
        return self.index - 1

    def local_value(self, i, x):
        x = self._check_local(x)
        return float(0.5 * (self.q[i] * x * x).sum()
                     + (self.c**2 / (4.0 * self.n)) * x[self._ii] ** 4)

    def local_grad(self, i, x):
        x = self._check_local(x)
        g = self.q[i] * x
        g[self._ii] += (self.c**2 / self.n) * x[self._ii] ** 3
        return g

    def local_hessian(self, i, x):
        x = self._check_local(x)
        h = np.diag(self.q[i].copy())
        h[self._ii, self._ii] += 3.0 * (self.c**2 / self.n) * x[self._ii] ** 2
        return h

    def lipschitz_estimate(self, radius):
        """Gradient Lipschitz bound valid on the box ||x||_inf <= radius.

        Deliberately an over-estimate: max diagonal curvature plus the
        quartic term's worst-case curvature on the box.
        """
        if radius <= 0:
            raise ObjectiveError("radius must be positive")
        return float(np.abs(self.q).max(axis=1).max()
                     + 3.0 * (self.c**2 / self.n) * radius**2)

    def minimizers(self):
        """The two symmetric minimizers +-(1/c) sqrt(-sum_i q^i_II) e_I."""
        s = self.q[:, self._ii].sum()
        if s >= 0:
            raise ObjectiveError("sum of q^i_II must be negative")
        x = np.zeros(self.p)
        x[self._ii] = np.sqrt(-s) / self.c
        return x, -x

    def min_value(self) -> float:
        """Network objective value at either minimizer."""
        return self.global_value(self.minimizers()[0])

    def _check_local(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.p,):
            raise ObjectiveError("local vector must have dimension %d" % self.p)
        return x


def sample_quartic_problem(n, p, index, c, seed) -> QuadraticQuarticProblem:
    """Random diagonals: q^i_II uniform in (-1, 0), the rest uniform in (0, 1)."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    q = rng.uniform(0.0, 1.0, size=(n, p))
    q[q == 0.0] = 0.5  # keep the interval open
    q[:, index - 1] = -rng.uniform(0.0, 1.0, size=n)
    q[:, index - 1][q[:, index - 1] == 0.0] = -0.5
    return QuadraticQuarticProblem(q=q, index=index, c=float(c))


@dataclass
class QuadraticProblem(Objective):
    """Strongly convex sanity problem: f_i(x) = 1/2 ||x - b_i||^2.

    Unique network minimizer at the mean of the b_i; L = 1.
    """

    b: np.ndarray  # (n, p) targets

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.n, self.p = self.b.shape

    def local_value(self, i, x):
        d = np.asarray(x, dtype=float) - self.b[i]
        return float(0.5 * (d @ d))

    def local_grad(self, i, x):
        return np.asarray(x, dtype=float) - self.b[i]

    def local_hessian(self, i, x):
        return np.eye(self.p)

    def lipschitz_estimate(self, radius):
        return 1.0

    def minimizer(self) -> np.ndarray:
        return self.b.mean(axis=0)

    def min_value(self) -> float:
        return self.global_value(self.minimizer())


def sample_quadratic_problem(n, p, seed) -> QuadraticProblem:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    return QuadraticProblem(b=rng.uniform(-1.0, 1.0, size=(n, p)))


def finite_difference_grad(fn, x, step=1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of an ndarray."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += step
        xm[idx] -= step
        g[idx] = (fn(xp) - fn(xm)) / (2.0 * step)
    return g
