"""Small dense linear algebra helpers built on the SVD."""

from __future__ import annotations

import numpy as np


def numerical_rank(A, rtol: float = 1e-10) -> int:
    """Number of singular values above ``rtol`` times the largest."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def row_and_null_space(A, rtol: float = 1e-10) -> tuple[np.ndarray, np.ndarray, int]:
    """Orthonormal bases (as rows) of the row space and the kernel of ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros((0, n)), np.eye(n), 0
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return vt[:r], vt[r:], r
