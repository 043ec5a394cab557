"""Pfaffians of real skew-symmetric matrices.

Both routines use skew-symmetric Gaussian elimination with partial pivoting
(the Parlett-Reid LTL^T scheme): at step ``k`` the largest entry of column
``k`` below the diagonal is swapped into position ``k+1``, then a rank-2
update eliminates the pair ``(k, k+1)``.
"""

from __future__ import annotations

import numpy as np


def pfaffian(m) -> float:
    """Pfaffian of a real skew-symmetric matrix of even dimension.

    Returns 1.0 for the empty matrix and 0.0 for odd dimension or a
    structurally singular input.
    """
    A = np.array(m, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1 :, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2 :] / A[k, k + 1]
            col = A[k + 2 :, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def pfaffian_batch(stack) -> np.ndarray:
    """Pfaffians of a stack of skew-symmetric matrices, shape ``(..., n, n)``.

    Same algorithm as :func:`pfaffian`, vectorized over the leading axes.
    """
    A = np.array(stack, dtype=float)
    lead = A.shape[:-2]
    n = A.shape[-1]
    if n == 0:
        return np.ones(lead)
    if n % 2:
        return np.zeros(lead)
    A = A.reshape(-1, n, n)
    b = A.shape[0]
    rows = np.arange(b)
    pf = np.ones(b)
    for k in range(0, n - 1, 2):
        kp = k + 1 + np.argmax(np.abs(A[:, k + 1 :, k]), axis=1)
        swap = kp != k + 1
        if swap.any():
            r = rows[swap]
            kk = kp[swap]
            tmp = A[r, k + 1, :].copy()
            A[r, k + 1, :] = A[r, kk, :]
            A[r, kk, :] = tmp
            tmp = A[r, :, k + 1].copy()
            A[r, :, k + 1] = A[r, :, kk]
            A[r, :, kk] = tmp
            pf[swap] = -pf[swap]
        piv = A[:, k, k + 1]
        dead = piv == 0.0
        pf = np.where(dead, 0.0, pf * piv)
        if k + 2 < n:
            safe = np.where(dead, 1.0, piv)
            tau = A[:, k, k + 2 :] / safe[:, None]
            col = A[:, k + 2 :, k + 1]
            A[:, k + 2 :, k + 2 :] += tau[:, :, None] * col[:, None, :] - col[:, :, None] * tau[:, None, :]
    return pf.reshape(lead)
