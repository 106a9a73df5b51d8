"""Sequence distances: classic DTW, open-begin/open-end DTW and flat Euclidean.

All DTW variants share one dynamic program with the symmetric
three-predecessor recursion

    D(i, j) = c(i, j) + min(D(i-1, j), D(i, j-1), D(i-1, j-1))

where ``c`` is the Euclidean distance between frames. The program is a
compiled loop over a batch of equally long references, which is what makes
a whole-lexicon scan cheap.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .errors import JointSetMismatchError, ShapeError
from .joints import NormalizedSign


class StepPattern(str, enum.Enum):
    SYMMETRIC_P0 = "symmetric_p0"


@dataclass(frozen=True)
class DtwParams:
    open_begin: bool = True
    open_end: bool = True
    step_pattern: StepPattern = StepPattern.SYMMETRIC_P0
    normalize_by_query_length: bool = True

    def __post_init__(self):
        if StepPattern(self.step_pattern) is not StepPattern.SYMMETRIC_P0:
            raise ValueError("only the symmetric_p0 step pattern is supported")


FULL = DtwParams(open_begin=False, open_end=False)


@dataclass
class DistanceMatrix:
    values: np.ndarray
    row_labels: list = field(default_factory=list)
    col_labels: list = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError("distance matrix must be 2-D")
        if not (np.all(np.isfinite(self.values)) and np.all(self.values >= 0)):
            raise ValueError("distances must be finite and nonnegative")


def _frames_2d(x) -> np.ndarray:
    """Coerce a sign or array to ``(T, F)`` float64 frame vectors."""
    if isinstance(x, NormalizedSign):
        x = x.frames
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[:, None]
    return x.reshape(len(x), -1)


def frame_distance(a, b) -> float:
    """Euclidean distance between two frames of equal shape."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"frame shapes differ: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


@numba.njit(cache=True)
def _accumulate_kernel(q, refs, open_begin, open_end):
    n, feat = q.shape
    batch, m = refs.shape[0], refs.shape[1]
    out = np.empty(batch)
    prev = np.empty(m)
    row = np.empty(m)
    cost = np.empty(m)
    for b in range(batch):
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for f in range(feat):
                    diff = refs[b, j, f] - q[i, f]
                    acc += diff * diff
                cost[j] = np.sqrt(acc)
            if i == 0:
                if open_begin:
                    row[:] = cost
                else:
                    run = 0.0
                    for j in range(m):
                        run += cost[j]
                        row[j] = run
            else:
                row[0] = cost[0] + prev[0]
                for j in range(1, m):
                    row[j] = cost[j] + min(prev[j], prev[j - 1], row[j - 1])
            prev, row = row, prev
        out[b] = prev.min() if open_end else prev[m - 1]
    return out


def _accumulate(q: np.ndarray, refs: np.ndarray, open_begin: bool, open_end: bool) -> np.ndarray:
    """Run the DP for one query ``(n, F)`` against references ``(B, m, F)``.

    Returns the unnormalized distance for each reference, shape ``(B,)``.
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    refs = np.ascontiguousarray(refs, dtype=np.float64)
    return _accumulate_kernel(q, refs, bool(open_begin), bool(open_end))


def _check_features(q: np.ndarray, r: np.ndarray) -> None:
    if q.shape[-1] != r.shape[-1]:
        raise ShapeError(f"frame sizes differ: {q.shape[-1]} vs {r.shape[-1]}")
    if len(q) == 0 or r.shape[-2] == 0:
        raise ShapeError("sequences must be nonempty")


def dtw_obe(q, ref, p: DtwParams = DtwParams()) -> float:
    """DTW where the alignment may start and/or end anywhere in ``ref``.

    Openness applies to the reference axis only, so the query is matched
    against the best-fitting stretch of the reference. The distance is
    asymmetric in its arguments whenever either end is open.
    """
    q2, r2 = _frames_2d(q), _frames_2d(ref)
    _check_features(q2, r2)
    d = float(_accumulate(q2, r2[None], p.open_begin, p.open_end)[0])
    return d / len(q2) if p.normalize_by_query_length else d


def dtw_full(q, ref, normalize_by_query_length: bool = True) -> float:
    """Classic DTW anchored at both endpoints."""
    return dtw_obe(q, ref, DtwParams(False, False, normalize_by_query_length=normalize_by_query_length))


def dtw_batch(q, refs, p: DtwParams = DtwParams()) -> np.ndarray:
    """DTW of one query against a stack of equally long references ``(B, m, ...)``."""
    q2 = _frames_2d(q)
    refs = np.asarray(refs, dtype=np.float64)
    refs = refs.reshape(refs.shape[0], refs.shape[1], -1)
    _check_features(q2, refs)
    d = _accumulate(q2, refs, p.open_begin, p.open_end)
    return d / len(q2) if p.normalize_by_query_length else d


def euclidean_flat(q, ref) -> float:
    """Euclidean distance over all coordinates of two equally shaped signs."""
    if isinstance(q, NormalizedSign):
        q = q.frames
    if isinstance(ref, NormalizedSign):
        ref = ref.frames
    q = np.asarray(q, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if q.shape != ref.shape:
        raise ShapeError(f"sign shapes differ: {q.shape} vs {ref.shape}")
    return float(np.sqrt(np.sum((q - ref) ** 2)))


class Backend(str, enum.Enum):
    ELASTIC = "elastic"
    FLAT = "flat"


def _check_homogeneous(signs: Sequence[NormalizedSign]) -> None:
    if not signs:
        return
    js, length = signs[0].joint_set, signs[0].length
    for s in signs:
        if s.joint_set is not js:
            raise JointSetMismatchError(f"{s.joint_set.value} vs {js.value}")
        if s.length != length:
            raise ShapeError(f"sign lengths differ: {s.length} vs {length}")


def sign_label(s: NormalizedSign) -> tuple[str, str]:
    return (s.gloss, s.signer)


def distance_matrix(
    queries: Sequence[NormalizedSign],
    refs: Sequence[NormalizedSign],
    backend: Backend | str = Backend.ELASTIC,
    p: DtwParams = DtwParams(),
) -> DistanceMatrix:
    """Distances between every query (rows) and every reference (columns)."""
    backend = Backend(backend)
    _check_homogeneous(list(queries) + list(refs))
    values = np.zeros((len(queries), len(refs)))
    if refs:
        stack = np.stack([r.frames for r in refs]).astype(np.float64)
        flat = stack.reshape(len(refs), -1)
        for i, q in enumerate(queries):
            if backend is Backend.ELASTIC:
                values[i] = dtw_batch(q.frames, stack, p)
            else:
                values[i] = np.sqrt(np.sum((flat - q.flat()) ** 2, axis=1))
    return DistanceMatrix(values, [sign_label(q) for q in queries], [sign_label(r) for r in refs])
