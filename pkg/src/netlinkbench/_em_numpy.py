"""Numpy implementation of the per-edge EM kernels.

Fallback backend used when the compiled extension is unavailable; the
function surface mirrors ``_em_core``.  Scatter-adds go through one
``bincount`` per column, which keeps everything in C loops.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def _scatter_rows(idx, rows, n):
    out = np.empty((n, rows.shape[1]))
    for k in range(rows.shape[1]):
        out[:, k] = np.bincount(idx, weights=rows[:, k], minlength=n)
    return out


def edge_rates(U, V, W, src, dst):
    """Bilinear rates M_e = U[src_e] . W . V[dst_e] for each dyad."""
    if src.size == 0:
        return np.zeros(0)
    t = V @ W.T
    return np.einsum("ek,ek->e", U[src], t[dst])


def u_numerator(U, V, W, src, dst, eps):
    """num[i, k] = sum over edges (i, j) of (W V[j])_k / (M_ij + eps)."""
    if src.size == 0:
        return np.zeros_like(U)
    t = V @ W.T
    td = t[dst]
    r = 1.0 / (np.einsum("ek,ek->e", U[src], td) + eps)
    return _scatter_rows(src, td * r[:, None], U.shape[0])


def v_numerator(U, V, W, src, dst, eps):
    """num[j, l] = sum over edges (i, j) of (W^T U[i])_l / (M_ij + eps)."""
    if src.size == 0:
        return np.zeros_like(V)
    t = U @ W
    ts = t[src]
    r = 1.0 / (np.einsum("el,el->e", ts, V[dst]) + eps)
    return _scatter_rows(dst, ts * r[:, None], V.shape[0])


def w_numerator(U, V, W, src, dst, eps):
    """num[k, l] = sum over edges of U[i, k] V[j, l] / (M_ij + eps)."""
    if src.size == 0:
        return np.zeros_like(W)
    r = 1.0 / (edge_rates(U, V, W, src, dst) + eps)
    return (U[src] * r[:, None]).T @ V[dst]


def indexed_row_sum(idx, rows, n):
    """out[idx_e] += rows[e]; used for held-out dyad corrections."""
    idx = np.asarray(idx)
    rows = np.asarray(rows)
    if idx.size == 0:
        return np.zeros((n, rows.shape[1] if rows.ndim == 2 else 0))
    return _scatter_rows(idx, rows, n)


def pair_outer_sum(src, dst, A, B):
    """sum over dyads of outer(A[src_e], B[dst_e]), a K x K matrix."""
    if src.size == 0:
        return np.zeros((A.shape[1], B.shape[1]))
    return A[src].T @ B[dst]
