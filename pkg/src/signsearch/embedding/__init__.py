"""Dimensionality-reduction backends (PCA and UMAP) projecting signs to 2-D."""

from .embedded import EmbeddedSet, Method, embedded_distance_matrix
from .knn import knn_graph
from .pca import PcaModel, pca_embed, pca_fit, pca_project
from .umap import (
    UmapParams,
    directed_weights,
    find_ab_params,
    fuzzy_union,
    optimize_layout,
    smooth_knn,
    umap_embed,
)

__all__ = [
    "EmbeddedSet",
    "Method",
    "PcaModel",
    "UmapParams",
    "directed_weights",
    "embedded_distance_matrix",
    "find_ab_params",
    "fuzzy_union",
    "knn_graph",
    "optimize_layout",
    "pca_embed",
    "pca_fit",
    "pca_project",
    "smooth_knn",
    "umap_embed",
]
