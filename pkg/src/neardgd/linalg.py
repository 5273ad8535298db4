"""Dense symmetric linear algebra: Jacobi eigensolver, quadratic forms.

Matrices here are small (node-count sized), so a cyclic Jacobi sweep is
plenty and fully deterministic. All arithmetic is float64.
"""

from dataclasses import dataclass

import numpy as np

SYM_TOL = 1e-12


class SymmetryError(ValueError):
    """Input matrix is not symmetric within tolerance."""


def check_symmetric(a, tol=SYM_TOL):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SymmetryError("expected a square matrix, got shape %r" % (a.shape,))
    scale = np.maximum(1.0, np.abs(a))
    if not np.all(np.abs(a - a.T) <= tol * scale):
        raise SymmetryError("matrix not symmetric within %g" % tol)
    return a


@dataclass
class Spectrum:
    """Eigenvalues in ascending order with orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eigen(a, tol=SYM_TOL, max_sweeps=100) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Iterates sweeps of (p, q) rotations until the off-diagonal Frobenius norm
    drops below tol * ||A||_F.
    """
    a = check_symmetric(a)
    n = a.shape[0]
    b = a.copy()
    v = np.eye(n)
    norm_a = np.linalg.norm(a)
    if n == 1 or norm_a == 0.0:
        order = np.argsort(np.diag(b), kind="stable")
        return Spectrum(np.diag(b)[order].copy(), v[:, order].copy())

    for _ in range(max_sweeps):
        off = np.linalg.norm(b - np.diag(np.diag(b)))
        if off <= tol * norm_a:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = b[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (b[q, q] - b[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    # asymptotic tangent; avoids overflow in theta**2
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) if theta != 0 else 1.0
                    t = t / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * b[:, p] - s * b[:, q]
                rot_q = s * b[:, p] + c * b[:, q]
                b[:, p], b[:, q] = rot_p, rot_q
                rot_p = c * b[p, :] - s * b[q, :]
                rot_q = s * b[p, :] + c * b[q, :]
                b[p, :], b[q, :] = rot_p, rot_q
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    else:
        raise RuntimeError("Jacobi iteration failed to converge")

    w = np.diag(b).copy()
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], v[:, order])


def quad_form(a, x) -> float:
    """v' A v."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != (x.size, x.size):
        raise ValueError("dimension mismatch: A is %r, v has %d" % (a.shape, x.size))
    return float(x @ a @ x)


def sym_power(a, exponent: float) -> np.ndarray:
    """A^s for symmetric A via its eigendecomposition.

    Fractional exponents require positive eigenvalues (consensus matrices
    qualify). Integer powers of the full matrix are only used in diagnostics
    and tests, never in the consensus hot path.
    """
    spec = sym_eigen(a)
    lam = spec.eigenvalues
    if exponent != int(exponent) and np.any(lam <= 0):
        raise ValueError("fractional power of a non-positive-definite matrix")
    return (spec.eigenvectors * lam**exponent) @ spec.eigenvectors.T


def kron_identity(w, p: int) -> np.ndarray:
    """W (x) I_p, the stacked-space operator, materialized explicitly.

    Test/diagnostics utility only; the consensus module applies W block-wise.
    """
    return np.kron(np.asarray(w, dtype=float), np.eye(p))
