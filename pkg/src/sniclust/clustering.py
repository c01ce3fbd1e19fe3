"""DBSCAN over a precomputed distance matrix, min_samples fixed at 1.

With min_samples=1 every point is a core point, so DBSCAN reduces exactly
to the connected components of the graph that joins points at distance
<= epsilon.  That is how it is implemented here; labels follow first-seen
order, so the result is deterministic for a given point order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidEpsilonError, UnknownLabelError


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric n x n matrix of distances in [0, 1] with a zero diagonal."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.allclose(v, v.T, atol=1e-12):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diagonal(v) != 0.0):
            raise ValueError("distance matrix diagonal must be zero")
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError("distances must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Clustering:
    """Cluster labels (contiguous from 0) plus the epsilon that made them."""

    labels: np.ndarray
    epsilon: float
    num_clusters: int

    def __len__(self) -> int:
        return len(self.labels)


def dbscan(dist: DistanceMatrix, epsilon: float) -> Clustering:
    """Cluster by connected components of the <=epsilon graph."""
    if not (0.0 < epsilon < 1.0):
        raise InvalidEpsilonError(f"epsilon must be in (0, 1), got {epsilon}")
    n = dist.n
    values = dist.values
    labels = np.full(n, -1, dtype=np.intp)
    next_label = 0
    for start in range(n):
        if labels[start] != -1:
            continue
        stack = [start]
        labels[start] = next_label
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(values[i] <= epsilon):
                if labels[j] == -1:
                    labels[j] = next_label
                    stack.append(int(j))
        next_label += 1
    return Clustering(labels=labels, epsilon=epsilon, num_clusters=next_label)


def cluster_members(c: Clustering, label: int) -> list[int]:
    """Ascending point indices belonging to one cluster."""
    if not (0 <= label < c.num_clusters):
        raise UnknownLabelError(f"label {label} not in [0, {c.num_clusters})")
    return [int(i) for i in np.flatnonzero(c.labels == label)]


def expand_labels(c: Clustering, uindex: np.ndarray) -> Clustering:
    """Broadcast unique-level labels back onto a duplicate-preserving list.

    Valid because duplicates sit at distance 0 and always share a
    component; first-seen label order is preserved by construction.
    """
    return Clustering(labels=c.labels[uindex], epsilon=c.epsilon, num_clusters=c.num_clusters)
