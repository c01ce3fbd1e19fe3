"""End-to-end analysis of one dataset for a given pair of epsilons.

Distance matrices depend only on the dataset, so they are built once (at
the distinct-fingerprint / distinct-domain level) and reused across every
epsilon probe the optimizer makes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import Clustering, DistanceMatrix, dbscan, expand_labels
from .domains import DistanceParams, domain_distance_matrix
from .ingest import Dataset, client_distance_matrix
from .mapping import (
    GoodnessParams,
    MappingReport,
    WeightMatrix,
    compute_weights,
    connection_counts,
    distinct_sizes,
    evaluate_goodness,
)


@dataclass(frozen=True)
class AnalysisContext:
    """Dataset plus its precomputed unique-level distance matrices."""

    dataset: Dataset
    client_dist: DistanceMatrix
    client_uindex: np.ndarray
    domain_dist: DistanceMatrix
    domain_uindex: np.ndarray
    max_depth: int

    @classmethod
    def from_dataset(
        cls, ds: Dataset, distance_params: DistanceParams = DistanceParams()
    ) -> "AnalysisContext":
        cmatrix, cuindex = client_distance_matrix(ds)
        dmatrix, duindex, max_depth = domain_distance_matrix(ds.domains, distance_params)
        return cls(
            dataset=ds,
            client_dist=DistanceMatrix(cmatrix),
            client_uindex=cuindex,
            domain_dist=DistanceMatrix(dmatrix),
            domain_uindex=duindex,
            max_depth=max_depth,
        )

    @property
    def matrix_cells(self) -> int:
        """Distance-matrix entries held in memory (the quadratic cost driver)."""
        return self.client_dist.n**2 + self.domain_dist.n**2


@dataclass(frozen=True)
class AnalysisResult:
    client_clusters: Clustering        # per record
    domain_clusters: Clustering        # per record
    client_clusters_unique: Clustering
    domain_clusters_unique: Clustering
    counts: np.ndarray
    client_sizes: np.ndarray
    domain_sizes: np.ndarray
    weights: WeightMatrix
    report: MappingReport

    @property
    def n_good(self) -> int:
        return sum(e.is_good for e in self.report.entries)


def analyze(
    ctx: AnalysisContext,
    eps_clients: float,
    eps_domains: float,
    params: GoodnessParams = GoodnessParams(),
) -> AnalysisResult:
    """Cluster both sides, compute weights, and evaluate goodness."""
    cu = dbscan(ctx.client_dist, eps_clients)
    du = dbscan(ctx.domain_dist, eps_domains)
    cc = expand_labels(cu, ctx.client_uindex)
    dc = expand_labels(du, ctx.domain_uindex)
    counts = connection_counts(cc, dc)
    client_sizes = distinct_sizes(cu.labels, cu.num_clusters)
    domain_sizes = distinct_sizes(du.labels, du.num_clusters)
    weights = compute_weights(counts, client_sizes, domain_sizes, params)
    report = evaluate_goodness(weights, params)
    return AnalysisResult(
        client_clusters=cc,
        domain_clusters=dc,
        client_clusters_unique=cu,
        domain_clusters_unique=du,
        counts=counts,
        client_sizes=client_sizes,
        domain_sizes=domain_sizes,
        weights=weights,
        report=report,
    )
