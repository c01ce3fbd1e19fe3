"""Client-cluster to domain-cluster weights and the goodness verdict.

The weight between client cluster C and domain cluster D is W = f / e:
frequency f averages C's connection events into D over C's distinct
members, non-exclusivity e averages the connection events into D from
clients outside C over D's distinct members.  e gets add-one smoothing on
the external count so fully exclusive domains stay finite.  A client
cluster is good when its top-weight domain clusters clear a z-score
threshold Z, taking at most H of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .clustering import Clustering
from .errors import EmptyWeightsError, ShapeMismatchError

Ablation = Literal["full", "no_frequency", "no_exclusivity"]

# Relative tolerance under which a row's weight spread counts as zero;
# guards against float residue when all weights are equal.
_SIGMA_EPS = 1e-12


@dataclass(frozen=True)
class GoodnessParams:
    z: float = 1.0
    h: int = 1
    ablation: Ablation = "full"

    def __post_init__(self) -> None:
        if self.z < 0:
            raise ValueError("Z must be >= 0")
        if self.h < 1:
            raise ValueError("H must be >= 1")
        if self.ablation not in ("full", "no_frequency", "no_exclusivity"):
            raise ValueError(f"unknown ablation {self.ablation!r}")


@dataclass(frozen=True)
class WeightMatrix:
    """W, f, and smoothed e per (client cluster, domain cluster) pair."""

    weights: np.ndarray
    frequency: np.ndarray
    nonexclusivity: np.ndarray


@dataclass(frozen=True)
class ClientClusterMapping:
    client_cluster: int
    mapped_domain_clusters: list[int]
    top_weight: float
    z_of_top: Optional[float]  # None when the row is degenerate (sigma == 0)
    is_good: bool


@dataclass(frozen=True)
class MappingReport:
    entries: list[ClientClusterMapping]

    @property
    def good_fraction(self) -> float:
        return sum(e.is_good for e in self.entries) / len(self.entries)


def connection_counts(cc: Clustering, dc: Clustering) -> np.ndarray:
    """N[c][d] = number of records in client cluster c hitting domain cluster d."""
    if len(cc) != len(dc):
        raise ShapeMismatchError(f"{len(cc)} client labels vs {len(dc)} domain labels")
    flat = cc.labels * dc.num_clusters + dc.labels
    counts = np.bincount(flat, minlength=cc.num_clusters * dc.num_clusters)
    return counts.reshape(cc.num_clusters, dc.num_clusters)


def distinct_sizes(unique_labels: np.ndarray, num_clusters: int) -> np.ndarray:
    """Distinct-member count per cluster, from unique-level labels."""
    return np.bincount(unique_labels, minlength=num_clusters)


def compute_weights(
    counts: np.ndarray,
    client_sizes: np.ndarray,
    domain_sizes: np.ndarray,
    params: GoodnessParams = GoodnessParams(),
) -> WeightMatrix:
    """Build the full weight matrix for one clustering pair."""
    if counts.shape != (len(client_sizes), len(domain_sizes)):
        raise ShapeMismatchError("counts shape does not match cluster sizes")
    frequency = counts / client_sizes[:, None]
    external = counts.sum(axis=0)[None, :] - counts
    nonexclusivity = (external + 1.0) / domain_sizes[None, :]
    if params.ablation == "no_frequency":
        weights = 1.0 / nonexclusivity
    elif params.ablation == "no_exclusivity":
        weights = frequency.copy()
    else:
        weights = frequency / nonexclusivity
    return WeightMatrix(weights=weights, frequency=frequency, nonexclusivity=nonexclusivity)


def weight(
    counts: np.ndarray,
    c: int,
    d: int,
    client_sizes: np.ndarray,
    domain_sizes: np.ndarray,
    params: GoodnessParams = GoodnessParams(),
) -> tuple[float, float, float]:
    """(W, f, e) for one cluster pair; convenience over compute_weights."""
    wm = compute_weights(counts, client_sizes, domain_sizes, params)
    return float(wm.weights[c, d]), float(wm.frequency[c, d]), float(wm.nonexclusivity[c, d])


def _evaluate_row(c: int, row: np.ndarray, params: GoodnessParams) -> ClientClusterMapping:
    mu = float(row.mean())
    sigma = float(row.std())
    order = np.lexsort((np.arange(len(row)), -row))  # weight desc, ties to lower label
    top = int(order[0])
    scale = max(1.0, abs(mu))
    if sigma > _SIGMA_EPS * scale:
        z = (row - mu) / sigma
        qualified = [int(d) for d in order if z[d] >= params.z]
        mapped = qualified[: params.h]
        return ClientClusterMapping(
            client_cluster=c,
            mapped_domain_clusters=mapped,
            top_weight=float(row[top]),
            z_of_top=float(z[top]),
            is_good=bool(mapped),
        )
    # Degenerate rows: every weight equal.  A lone nonzero weight (a
    # single-domain-cluster row) is automatically good; several equal
    # weights only qualify when Z == 0.
    nonzero = int(np.count_nonzero(row))
    if nonzero == 1:
        mapped = [top]
        good = True
    elif params.z == 0.0:
        mapped = [int(d) for d in order[: params.h]]
        good = True
    else:
        mapped = []
        good = False
    return ClientClusterMapping(
        client_cluster=c,
        mapped_domain_clusters=mapped,
        top_weight=float(row[top]),
        z_of_top=None,
        is_good=good,
    )


def evaluate_goodness(wm: WeightMatrix, params: GoodnessParams = GoodnessParams()) -> MappingReport:
    """Per-client-cluster verdicts over a weight matrix."""
    if wm.weights.size == 0 or wm.weights.shape[1] == 0:
        raise EmptyWeightsError("no domain clusters to evaluate")
    entries = [_evaluate_row(c, wm.weights[c], params) for c in range(wm.weights.shape[0])]
    return MappingReport(entries=entries)


def good_fraction(report: MappingReport) -> float:
    return report.good_fraction
