"""Unsupervised TLS client identification from SNI domain names.

Clusters clients by TCP fingerprint and domains by a hierarchical name
distance, tunes the two DBSCAN epsilons with Bayesian optimization, and
maps each client cluster to the domain clusters it connects to most
frequently and most exclusively.
"""

from .analysis import AnalysisContext, AnalysisResult, analyze
from .clustering import Clustering, DistanceMatrix, cluster_members, dbscan
from .domains import (
    DistanceParams,
    ParsedDomain,
    fuzzy_similarity,
    levenshtein,
    normalized_distance,
    parse_domain,
    raw_distance,
)
from .ingest import (
    ConnectionRecord,
    Dataset,
    FieldContext,
    TcpFingerprint,
    client_distance,
    client_feature_vector,
    fingerprint,
    parse_dataset,
)
from .mapping import (
    GoodnessParams,
    MappingReport,
    WeightMatrix,
    compute_weights,
    connection_counts,
    evaluate_goodness,
    good_fraction,
)
from .optimize import ObjectivePoint, OptimizerConfig, objective, optimize
from .synth import DeviceProfile, Scenario, generate, meaningful_fraction_sweep

__all__ = [
    "AnalysisContext",
    "AnalysisResult",
    "analyze",
    "Clustering",
    "DistanceMatrix",
    "cluster_members",
    "dbscan",
    "DistanceParams",
    "ParsedDomain",
    "fuzzy_similarity",
    "levenshtein",
    "normalized_distance",
    "parse_domain",
    "raw_distance",
    "ConnectionRecord",
    "Dataset",
    "FieldContext",
    "TcpFingerprint",
    "client_distance",
    "client_feature_vector",
    "fingerprint",
    "parse_dataset",
    "GoodnessParams",
    "MappingReport",
    "WeightMatrix",
    "compute_weights",
    "connection_counts",
    "evaluate_goodness",
    "good_fraction",
    "ObjectivePoint",
    "OptimizerConfig",
    "objective",
    "optimize",
    "DeviceProfile",
    "Scenario",
    "generate",
    "meaningful_fraction_sweep",
]

__version__ = "0.1.0"
