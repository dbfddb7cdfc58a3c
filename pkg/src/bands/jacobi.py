"""
Jacobi Eigensolver - Cyclic Jacobi rotations for small Hermitian matrices.

Each rotation zeroes one off-diagonal pair (p, q). For a complex entry
b = |b| e^{i alpha} the rotation is D R with D = diag(1, e^{-i alpha}),
which makes the 2x2 block real, followed by a real Givens rotation R.
Sweeps visit every pair in row order until the off-diagonal norm is
negligible compared to the matrix norm.
"""

import logging
import math
from typing import Tuple

import numpy as np

from core.errors import EigenSolverError

logger = logging.getLogger(__name__)


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0)))


def _rotation(a: np.ndarray, p: int, q: int) -> np.ndarray:
    b = a[p, q]
    modulus = abs(b)
    phase = b / modulus
    theta = 0.5 * math.atan2(2.0 * modulus, (a[q, q] - a[p, p]).real)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)


def jacobi_eigh(
    matrix: np.ndarray, tol: float = 1e-14, max_sweeps: int = 50
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Diagonalize a Hermitian matrix.

    Args:
        matrix: N x N Hermitian matrix (not modified)
        tol: Relative off-diagonal norm at which to stop
        max_sweeps: Sweep limit before giving up

    Returns:
        (eigenvalues, eigenvectors), unsorted, eigenvectors as columns

    Raises:
        EigenSolverError: no convergence within max_sweeps
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v

    threshold = tol * scale
    for sweep in range(max_sweeps + 1):
        if _off_norm(a) <= threshold:
            logger.debug("jacobi converged after %d sweeps (n=%d)", sweep, n)
            return np.real(np.diag(a)).copy(), v
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= threshold / n:
                    continue
                j = _rotation(a, p, q)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ j

    raise EigenSolverError(f"Jacobi iteration failed for a {n}x{n} matrix", sweeps=max_sweeps)
