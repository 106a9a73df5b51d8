"""Two-component PCA via power iteration with deflation.

The covariance matrix is never formed; products with it are evaluated as
``Xc.T @ (Xc @ v) / (n - 1)`` so the cost per iteration is ``O(n * d)``,
which matters for the 4988-dimensional upper-body signs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateDataError, EigenConvergenceError, ShapeError
from .embedded import EmbeddedSet, Method

N_COMPONENTS = 2


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def project(self, v: np.ndarray) -> np.ndarray:
        return pca_project(self, v)


def _fix_sign(v: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; near-ties resolved by the first index
    mags = np.abs(v)
    idx = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-9))[0])
    return -v if v[idx] < 0 else v


def _power_iteration(matvec, start: np.ndarray, tol: float, max_iter: int, scale: float):
    v = start / np.linalg.norm(start)
    for _ in range(max_iter):
        w = matvec(v)
        norm = np.linalg.norm(w)
        if norm <= scale * 1e-14:
            # v lies (numerically) in the null space
            return v, 0.0
        w = w / norm
        if np.linalg.norm(_fix_sign(w) - _fix_sign(v)) < tol:
            return w, float(w @ matvec(w))
        v = w
    raise EigenConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def pca_fit(data: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> PcaModel:
    """Fit the top two principal directions of ``data`` (rows are samples).

    Variances use the unbiased ``n - 1`` normalization. Each component is
    oriented so that its largest-magnitude entry is positive.

    Raises
    ------
    DegenerateDataError
        All rows are identical.
    EigenConvergenceError
        Power iteration did not reach ``tol`` within ``max_iter`` steps.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3 or x.shape[1] < 2:
        raise ShapeError(f"pca_fit needs an (n >= 3, d >= 2) matrix, got {x.shape}")
    n, d = x.shape
    mean = x.mean(axis=0)
    xc = x - mean
    total = float(np.sum(xc * xc)) / (n - 1)
    if total <= 1e-300 or not np.any(xc):
        raise DegenerateDataError("data has zero variance")

    found: list[np.ndarray] = []
    values: list[float] = []

    def matvec(v):
        out = xc.T @ (xc @ v) / (n - 1)
        for u, lam in zip(found, values):
            out -= lam * (u @ v) * u
        return out

    rng = np.random.default_rng(0)
    for _ in range(N_COMPONENTS):
        start = rng.standard_normal(d)
        for u in found:
            start -= (u @ start) * u
        v, lam = _power_iteration(matvec, start, tol, max_iter, total)
        if lam == 0.0:
            # no variance left: any unit vector orthogonal to the others
            for u in found:
                v = v - (u @ v) * u
            v = v / np.linalg.norm(v)
        found.append(_fix_sign(v))
        values.append(max(lam, 0.0))

    return PcaModel(mean, np.vstack(found), np.array(values))


def pca_project(model: PcaModel, v: np.ndarray) -> np.ndarray:
    """Coordinates of ``v`` (one vector or a row stack) along the components."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != model.mean.shape[0]:
        raise ShapeError(f"expected dimension {model.mean.shape[0]}, got {v.shape[-1]}")
    return (v - model.mean) @ model.components.T


def pca_embed(data: np.ndarray, labels) -> EmbeddedSet:
    """Fit on all rows and return their 2-D coordinates as an embedded set."""
    x = np.asarray(data, dtype=np.float64)
    model = pca_fit(x)
    return EmbeddedSet(pca_project(model, x), labels, Method.PCA, "pca2")
