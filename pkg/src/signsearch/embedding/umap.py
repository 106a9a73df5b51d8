"""UMAP to two dimensions, written out step by step.

The graph side builds a fuzzy k-NN graph: per-point bandwidth calibration,
exponential membership strengths and a probabilistic-OR symmetrization.
The layout side runs seeded SGD with attractive moves along sampled edges
and repulsive moves against random vertices, using the low-dimensional
similarity ``1 / (1 + a * d^(2b))``.

Points are processed in a canonical order (sorted by label) and every point
draws random numbers from its own stream keyed by ``(seed, canonical id)``,
so the embedding does not depend on the order in which rows are passed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse
from scipy.optimize import curve_fit

from ..errors import ParamError, ShapeError
from .embedded import EmbeddedSet, Method
from .knn import knn_graph

SIGMA_MIN, SIGMA_MAX = 1e-3, 1e3
INIT_RANGE = 10.0
GRAD_CLIP = 4.0


def find_ab_params(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Least-squares fit of ``1 / (1 + a x^(2b))`` to the target membership curve.

    The target is 1 below ``min_dist`` and ``exp(-(x - min_dist) / spread)``
    beyond it, sampled on 300 points in ``[0, 3 * spread]``.
    """

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2 * b))

    xv = np.linspace(0, spread * 3, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    (a, b), _ = curve_fit(curve, xv, yv)
    return float(a), float(b)


@dataclass(frozen=True)
class UmapParams:
    seed: int = 0
    n_neighbors: int = 15
    min_dist: float = 0.1
    n_epochs: int = 200
    learning_rate: float = 1.0
    negative_samples: int = 5
    curve_a: float | None = field(default=None)
    curve_b: float | None = field(default=None)

    def __post_init__(self):
        if self.n_neighbors < 2:
            raise ParamError("n_neighbors must be at least 2")
        if self.n_epochs < 1 or self.negative_samples < 1:
            raise ParamError("n_epochs and negative_samples must be positive")
        if self.min_dist < 0 or self.learning_rate <= 0:
            raise ParamError("min_dist must be >= 0 and learning_rate > 0")
        if self.curve_a is None or self.curve_b is None:
            a, b = find_ab_params(self.min_dist)
            object.__setattr__(self, "curve_a", a)
            object.__setattr__(self, "curve_b", b)

    def fingerprint(self) -> str:
        text = repr(
            (self.seed, self.n_neighbors, self.min_dist, self.n_epochs, self.learning_rate,
             self.negative_samples, round(self.curve_a, 12), round(self.curve_b, 12))
        )
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def smooth_knn(distances, n_iter: int = 64) -> tuple[float, float]:
    """Calibrate one point's neighborhood.

    ``rho`` is the nearest-neighbor distance; ``sigma`` is bisected so that
    ``sum(exp(-max(0, d - rho) / sigma)) == log2(k)`` and is then clamped to
    ``[1e-3, 1e3]``.
    """
    d = np.asarray(distances, dtype=np.float64)
    k = len(d)
    if k < 2:
        raise ParamError("smooth_knn needs at least two distances")
    rho = float(d[0])
    target = np.log2(k)
    shifted = np.maximum(d - rho, 0.0)
    lo, hi, mid = 0.0, np.inf, 1.0
    for _ in range(n_iter):
        psum = float(np.sum(np.exp(-shifted / mid)))
        # >= so that a sum stuck at the target through underflow still shrinks sigma
        if psum >= target:
            hi = mid
            mid = (lo + hi) / 2.0
        else:
            lo = mid
            mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
    return rho, float(min(max(mid, SIGMA_MIN), SIGMA_MAX))


def directed_weights(indices: np.ndarray, distances: np.ndarray) -> scipy.sparse.csr_matrix:
    """Membership strengths of each point's neighbors as a sparse ``(n, n)`` matrix."""
    n, k = indices.shape
    vals = np.empty((n, k))
    for i in range(n):
        rho, sigma = smooth_knn(distances[i])
        vals[i] = np.exp(-np.maximum(0.0, distances[i] - rho) / sigma)
    rows = np.repeat(np.arange(n), k)
    return scipy.sparse.csr_matrix((vals.ravel(), (rows, indices.ravel())), shape=(n, n))


def fuzzy_union(directed):
    """Symmetrize with the probabilistic OR ``w + w.T - w * w.T``.

    Accepts a dense array or a scipy sparse matrix and returns the same kind.
    """
    if scipy.sparse.issparse(directed):
        w = scipy.sparse.csr_matrix(directed)
        wt = w.T.tocsr()
        out = (w + wt - w.multiply(wt)).tocsr()
        out.eliminate_zeros()
        return out
    w = np.asarray(directed, dtype=np.float64)
    return w + w.T - w * w.T


@numba.njit(cache=True)
def _next_u64(states, i):
    # splitmix64 step on the stream owned by point i
    states[i] += np.uint64(0x9E3779B97F4A7C15)
    z = states[i]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _sgd_layout(emb, head, tail, epochs_per_sample, states, a, b, n_epochs, lr, n_negative):
    n_vertices = emb.shape[0]
    dim = emb.shape[1]
    next_sample = epochs_per_sample.copy()
    for epoch in range(n_epochs):
        alpha = lr * (1.0 - epoch / n_epochs)
        for e in range(head.shape[0]):
            if next_sample[e] > epoch:
                continue
            j = head[e]
            k = tail[e]
            d2 = 0.0
            for c in range(dim):
                diff = emb[j, c] - emb[k, c]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = -2.0 * a * b * d2 ** (b - 1.0) / (a * d2**b + 1.0)
            else:
                coeff = 0.0
            for c in range(dim):
                g = coeff * (emb[j, c] - emb[k, c])
                g = min(max(g, -GRAD_CLIP), GRAD_CLIP)
                emb[j, c] += g * alpha
                emb[k, c] -= g * alpha
            next_sample[e] += epochs_per_sample[e]

            for _ in range(n_negative):
                k = np.int64(_next_u64(states, j) % np.uint64(n_vertices))
                if k == j:
                    continue
                d2 = 0.0
                for c in range(dim):
                    diff = emb[j, c] - emb[k, c]
                    d2 += diff * diff
                if d2 > 0.0:
                    coeff = 2.0 * b / ((0.001 + d2) * (a * d2**b + 1.0))
                else:
                    coeff = 0.0
                for c in range(dim):
                    if coeff > 0.0:
                        g = coeff * (emb[j, c] - emb[k, c])
                        g = min(max(g, -GRAD_CLIP), GRAD_CLIP)
                    else:
                        g = GRAD_CLIP
                    emb[j, c] += g * alpha
    return emb


def _point_streams(seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Initial positions and PRNG states, one independent stream per point id."""
    init = np.empty((n, 2))
    states = np.empty(n, dtype=np.uint64)
    for i in range(n):
        ss = np.random.SeedSequence([seed, i])
        init[i] = np.random.default_rng(ss).uniform(-INIT_RANGE, INIT_RANGE, 2)
        states[i] = ss.generate_state(1, np.uint64)[0]
    return init, states


def optimize_layout(weights, params: UmapParams) -> np.ndarray:
    """Seeded SGD layout of a symmetric fuzzy graph into 2-D.

    Each edge is visited at a frequency proportional to its weight (edges
    below ``max_weight / n_epochs`` never fire); every visit is followed by
    ``negative_samples`` repulsive moves of the edge head. The learning rate
    decays linearly to zero. Output is bitwise reproducible for a fixed
    seed.
    """
    w = scipy.sparse.coo_matrix(weights)
    n = w.shape[0]
    if w.shape != (n, n):
        raise ShapeError("weights must be square")
    keep = w.data >= w.data.max() / params.n_epochs if w.nnz else np.zeros(0, bool)
    head, tail, vals = w.row[keep], w.col[keep], w.data[keep]
    order = np.lexsort((tail, head))
    head = head[order].astype(np.int64)
    tail = tail[order].astype(np.int64)
    vals = vals[order]

    emb, states = _point_streams(params.seed, n)
    if len(vals) == 0:
        return emb
    epochs_per_sample = vals.max() / vals
    return _sgd_layout(
        emb, head, tail, epochs_per_sample, states,
        float(params.curve_a), float(params.curve_b),
        int(params.n_epochs), float(params.learning_rate), int(params.negative_samples),
    )


def _canonical_order(labels) -> np.ndarray:
    try:
        return np.array(sorted(range(len(labels)), key=lambda i: labels[i]), dtype=np.int64)
    except TypeError:
        return np.array(sorted(range(len(labels)), key=lambda i: repr(labels[i])), dtype=np.int64)


def umap_embed(data: np.ndarray, labels, params: UmapParams) -> EmbeddedSet:
    """Embed every row of ``data`` to 2-D; rows of the result follow ``labels``."""
    x = np.asarray(data, dtype=np.float64)
    labels = list(labels)
    n = x.shape[0]
    if len(labels) != n:
        raise ShapeError("one label per row is required")
    if n <= params.n_neighbors:
        raise ParamError(f"need more than n_neighbors={params.n_neighbors} points, got {n}")
    order = _canonical_order(labels)
    xs = x[order]
    indices, distances = knn_graph(xs, params.n_neighbors)
    graph = fuzzy_union(directed_weights(indices, distances))
    emb_sorted = optimize_layout(graph, params)
    points = np.empty_like(emb_sorted)
    points[order] = emb_sorted
    digest = hashlib.sha256(params.fingerprint().encode())
    digest.update(np.ascontiguousarray(xs).tobytes())
    return EmbeddedSet(points, labels, Method.UMAP, digest.hexdigest()[:16])
