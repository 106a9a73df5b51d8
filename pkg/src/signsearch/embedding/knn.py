"""Exact k-nearest-neighbor graph."""

from __future__ import annotations

import numpy as np

from ..errors import ParamError

_CANDIDATE_MARGIN = 8


def knn_graph(data: np.ndarray, k: int, chunk: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Exact Euclidean k-NN of every row, excluding the row itself.

    Candidates are shortlisted with the Gram-matrix expansion, then their
    distances are recomputed from coordinate differences so that exact
    duplicates come out at exactly 0. Ties are broken by the lower index.

    Returns
    -------
    indices : (n, k) int array
    distances : (n, k) float array, ascending per row
    """
    x = np.asarray(data, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k < n:
        raise ParamError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    sq = np.einsum("ij,ij->i", x, x)
    n_cand = min(n - 1, k + _CANDIDATE_MARGIN)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        approx = sq[start:stop, None] + sq[None, :] - 2.0 * (x[start:stop] @ x.T)
        rows = np.arange(start, stop)
        approx[rows - start, rows] = np.inf
        cand = np.argpartition(approx, n_cand - 1, axis=1)[:, :n_cand]
        for r, i in enumerate(rows):
            c = cand[r]
            c = c[c != i]
            d = np.sqrt(np.sum((x[c] - x[i]) ** 2, axis=1))
            order = np.lexsort((c, d))[:k]
            indices[i] = c[order]
            distances[i] = d[order]
    return indices, distances
