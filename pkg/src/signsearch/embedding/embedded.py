"""Embedded point sets and distances between their members."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..distance import DistanceMatrix
from ..errors import LabelError, ShapeError


class Method(str, enum.Enum):
    PCA = "pca"
    UMAP = "umap"


@dataclass(eq=False)
class EmbeddedSet:
    points: np.ndarray
    labels: list
    method: Method
    params_hash: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = list(self.labels)
        if self.points.shape != (len(self.labels), 2):
            raise ShapeError(f"expected ({len(self.labels)}, 2) points, got {self.points.shape}")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("embedded coordinates must be finite")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        self._row = {label: i for i, label in enumerate(self.labels)}

    def row(self, label) -> int:
        try:
            return self._row[label]
        except KeyError:
            raise LabelError(f"unknown label {label!r}") from None


def embedded_distance_matrix(emb: EmbeddedSet, query_labels, ref_labels) -> DistanceMatrix:
    q = emb.points[[emb.row(label) for label in query_labels]]
    r = emb.points[[emb.row(label) for label in ref_labels]]
    diff = q[:, None, :] - r[None, :, :]
    values = np.sqrt(np.sum(diff * diff, axis=-1))
    return DistanceMatrix(values, list(query_labels), list(ref_labels))
