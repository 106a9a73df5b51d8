"""Slow, obviously-correct reference computations used by the tests.

None of these share code with the package.
"""

from __future__ import annotations

import math

import numpy as np


def frame_cost(a, b) -> float:
    a = np.ravel(np.asarray(a, dtype=float))
    b = np.ravel(np.asarray(b, dtype=float))
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def monotone_paths(n: int, m: int, start_cols=None, end_cols=None):
    """Enumerate alignment paths through an n x m grid.

    A path starts at (0, j0) for j0 in ``start_cols`` and ends at
    (n - 1, j1) for j1 in ``end_cols``, moving by (1, 0), (0, 1) or (1, 1).
    """
    start_cols = [0] if start_cols is None else start_cols
    end_cols = [m - 1] if end_cols is None else end_cols

    def walk(i, j):
        if i == n - 1 and j in end_cols:
            yield [(i, j)]
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            a, b = i + di, j + dj
            if a < n and b < m:
                for rest in walk(a, b):
                    yield [(i, j)] + rest

    for j0 in start_cols:
        yield from walk(0, j0)


def brute_dtw(q, r, open_begin=False, open_end=False) -> float:
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    n, m = len(q), len(r)
    starts = range(m) if open_begin else [0]
    ends = set(range(m)) if open_end else {m - 1}
    best = math.inf
    for path in monotone_paths(n, m, starts, ends):
        best = min(best, sum(frame_cost(q[i], r[j]) for i, j in path))
    return best


def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100):
    """Cyclic Jacobi rotations for a symmetric matrix; eigenvalues descending."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p, q] ** 2 for p in range(n) for q in range(n) if p != q))
        if off < tol * max(1.0, np.abs(a).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    vals = np.diag(a)
    order = np.argsort(-vals)
    return vals[order], v[:, order]


def interp_formula(series, target):
    """Linear resampling written out sample by sample."""
    series = [float(x) for x in series]
    n = len(series)
    out = []
    for i in range(target):
        pos = i * (n - 1) / (target - 1)
        lo = min(int(math.floor(pos)), n - 2)
        frac = pos - lo
        out.append(series[lo] + frac * (series[lo + 1] - series[lo]))
    return out


def sort_median_filter(series, r):
    series = [float(x) for x in series]
    n = len(series)
    out = []
    for t in range(n):
        window = sorted(series[min(max(u, 0), n - 1)] for u in range(t - r, t + r + 1))
        out.append(window[r])
    return out


def brute_knn(x, k):
    x = np.asarray(x, dtype=float)
    n = len(x)
    idx, dist = [], []
    for i in range(n):
        cand = [(frame_cost(x[i], x[j]), j) for j in range(n) if j != i]
        cand.sort()
        idx.append([j for _, j in cand[:k]])
        dist.append([d for d, _ in cand[:k]])
    return np.array(idx), np.array(dist)


def sigma_root(distances):
    """Solve sum(exp(-max(0, d - rho) / s)) = log2(k) for s with Brent's method."""
    from scipy.optimize import brentq

    d = np.asarray(distances, dtype=float)
    rho = d[0]
    target = math.log2(len(d))

    def f(s):
        return sum(math.exp(-max(0.0, x - rho) / s) for x in d) - target

    return brentq(f, 1e-6, 1e6, xtol=1e-14, rtol=1e-14, maxiter=500)


def rational_curve_fit(min_dist, spread=1.0):
    """Fit 1 / (1 + a x^(2b)) by Nelder-Mead on the summed squared error."""
    from scipy.optimize import minimize

    xs = np.linspace(0, 3 * spread, 300)
    ys = np.array([1.0 if x < min_dist else math.exp(-(x - min_dist) / spread) for x in xs])

    def sse(p):
        a, b = p
        return float(np.sum((1.0 / (1.0 + a * xs ** (2 * b)) - ys) ** 2))

    res = minimize(sse, [1.0, 1.0], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 20000})
    return tuple(res.x)
