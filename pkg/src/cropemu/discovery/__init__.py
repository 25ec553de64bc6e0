"""Resilient-trait discovery: ranking, intersection, clusters, importance."""

from .clustering import (
    ClusterSummary,
    KMeansResult,
    cluster_summary,
    genotype_matrix,
    genotype_names,
    kmeans,
)
from .importance import ImportanceReport, permutation_importance
from .pca import PcaResult, pca_project
from .ranking import (
    DEFAULT_TARGET,
    Environment,
    PredictionTable,
    ResilienceResult,
    intersect_resilient,
    rank_topk_per_env,
)

__all__ = [
    "DEFAULT_TARGET",
    "Environment",
    "PredictionTable",
    "ResilienceResult",
    "intersect_resilient",
    "rank_topk_per_env",
    "ClusterSummary",
    "KMeansResult",
    "cluster_summary",
    "genotype_matrix",
    "genotype_names",
    "kmeans",
    "ImportanceReport",
    "permutation_importance",
    "PcaResult",
    "pca_project",
]
