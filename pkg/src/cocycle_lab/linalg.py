"""Dense Hermitian eigendecomposition by cyclic Jacobi rotations.

Small matrices only (operator blocks up to the default 64x64 cap), complex
Hermitian.  Each pivot (p, q) is annihilated by the unitary

    G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]],   A[p,q] = |A[p,q]| e^{i phi},

which is the classical real rotation conjugated by the phase that makes the
pivot real.  Sweeps run until the off-diagonal Frobenius norm falls below
``tol`` times the matrix scale.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericError, PreconditionError

DEFAULT_EIG_DIM_CAP = 64
HERMITIAN_TOL = 1e-10


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(a, tol: float = 1e-12, max_sweeps: int = 100,
                  max_dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending, real) and orthonormal eigenvector columns.

    Raises ``PreconditionError`` for non-Hermitian or oversized input and
    ``NumericError`` with the residual if the sweep cap is hit.
    """
    A = np.asarray(a, dtype=complex).copy()
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError(f"matrix must be square, got shape {A.shape}")
    n = A.shape[0]
    cap = DEFAULT_EIG_DIM_CAP if max_dim is None else max_dim
    if n > cap:
        raise PreconditionError(
            f"matrix dimension {n} exceeds the eigensolver cap {cap}; "
            f"pass max_dim to raise it")
    scale = float(np.linalg.norm(A))
    if float(np.linalg.norm(A - A.conj().T)) > HERMITIAN_TOL * max(1.0, scale):
        raise PreconditionError("matrix is not Hermitian to 1e-10")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    if n == 1:
        return np.array([A[0, 0].real]), V

    target = tol * max(scale, 1e-300)
    skip = target / max(n * n, 1)
    for _ in range(max_sweeps):
        if _off_norm(A) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                beta = abs(apq)
                if beta <= skip:
                    continue
                phase = apq / beta
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * beta)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # column mix by G, then row mix by G*
                gpp, gpq = c, s
                gqp, gqq = -s * np.conj(phase), c * np.conj(phase)
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = col_p * gpp + col_q * gqp
                A[:, q] = col_p * gpq + col_q * gqq
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = np.conj(gpp) * row_p + np.conj(gqp) * row_q
                A[q, :] = np.conj(gpq) * row_p + np.conj(gqq) * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vcol_p = V[:, p].copy()
                vcol_q = V[:, q].copy()
                V[:, p] = vcol_p * gpp + vcol_q * gqp
                V[:, q] = vcol_p * gpq + vcol_q * gqq
    else:
        residual = _off_norm(A)
        if residual > target:
            raise NumericError(
                f"Jacobi sweeps did not converge in {max_sweeps} sweeps "
                f"(off-diagonal residual {residual:.3e})", residual=residual)

    evals = np.real(np.diag(A))
    order = np.argsort(evals, kind="stable")
    return evals[order], V[:, order]


def eigenvalue_clusters(evals: np.ndarray, tol: float = 1e-8) -> list[list[int]]:
    """Indices of eigenvalues grouped greedily; a gap > tol starts a new cluster."""
    clusters: list[list[int]] = []
    for i, t in enumerate(evals):
        if clusters and abs(t - evals[clusters[-1][-1]]) <= tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters
