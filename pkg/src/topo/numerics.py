"""Dense complex linear algebra with explicit contracts.

All matrix inverses elsewhere in the package go through :func:`solve`;
explicit inversion is avoided for stability of products like (G + i)^-1.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EigenFailure, SingularMatrix

COND_THRESHOLD = 1e12
DEFECT_TOL = 1e-8


def as_matrix(A):
    """Validate and return a finite square complex matrix."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray          # shape (n,)
    right_eigenvectors: np.ndarray   # shape (n, n), unit-norm columns
    jordan_defect_flags: np.ndarray  # bool per eigenvalue
    residual: float = 0.0
    clusters: list = field(default_factory=list)  # index groups of near-equal eigenvalues


def _cluster_eigenvalues(lam, tol):
    """Group eigenvalues within tol of each other (transitive closure)."""
    n = len(lam)
    order = np.argsort(lam.real + 1e-9 * lam.imag)
    groups = []
    for idx in order:
        for g in groups:
            if any(abs(lam[idx] - lam[j]) <= tol for j in g):
                g.append(idx)
                break
        else:
            groups.append([idx])
    return groups


def eigen(A, tol=1e-10):
    """Eigendecomposition with residual check and defective-cluster detection.

    Clusters of eigenvalues within tol*scale are flagged as possibly defective
    when the eigenvector Gram matrix is rank deficient within the cluster.
    """
    A = as_matrix(A)
    n = A.shape[0]
    scale = max(np.linalg.norm(A, 2), 1e-300)
    try:
        lam, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue iteration failed: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0, keepdims=True)
    res = np.linalg.norm(A @ V - V * lam, 2)
    if res > 100 * tol * scale * n:
        raise EigenFailure(f"residual {res:.3e} exceeds {tol:.1e}*||A||*100n")

    flags = np.zeros(n, dtype=bool)
    clusters = _cluster_eigenvalues(lam, tol * scale * 100)
    for g in clusters:
        if len(g) < 2:
            continue
        W = V[:, g]
        rank = np.linalg.matrix_rank(W.conj().T @ W, tol=DEFECT_TOL)
        if rank < len(g):
            flags[g] = True
    return EigenDecomposition(lam, V, flags, residual=res, clusters=clusters)


def solve(A, B, cond_threshold=COND_THRESHOLD):
    """Solve A X = B, raising SingularMatrix above the condition threshold."""
    A = as_matrix(A)
    B = np.asarray(B, dtype=complex)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > cond_threshold:
        raise SingularMatrix(cond, cond_threshold)
    return np.linalg.solve(A, B)


def rsolve(B, A, cond_threshold=COND_THRESHOLD):
    """Solve X A = B, i.e. B A^-1, via a transposed linear solve."""
    return solve(np.asarray(A, dtype=complex).T, np.asarray(B, dtype=complex).T,
                 cond_threshold=cond_threshold).T


def hermitian_part(A):
    return (A + A.conj().T) / 2


def imag_part(A):
    """Matrix imaginary part (A - A*) / 2i."""
    return (A - A.conj().T) / 2j
