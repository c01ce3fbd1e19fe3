"""Independent brute-force oracles used by the test suite.

Deliberately written with different algorithms than the library: edit
distance as a full Wagner-Fischer matrix, clustering as union-find over
the thresholded edge list.  They stay independent of the code paths they
check.
"""

from __future__ import annotations

import numpy as np


def edit_distance_oracle(a: str, b: str) -> int:
    """Full dynamic-programming matrix, no row reuse."""
    la, lb = len(a), len(b)
    m = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la + 1):
        m[i][0] = i
    for j in range(lb + 1):
        m[0][j] = j
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            m[i][j] = min(m[i - 1][j] + 1, m[i][j - 1] + 1, m[i - 1][j - 1] + cost)
    return m[la][lb]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def components_oracle(values: np.ndarray, epsilon: float) -> list[int]:
    """Connected components of the <=epsilon graph, labels by first-seen order."""
    n = values.shape[0]
    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if values[i, j] <= epsilon:
                uf.union(i, j)
    labels: list[int] = []
    seen: dict[int, int] = {}
    for i in range(n):
        root = uf.find(i)
        if root not in seen:
            seen[root] = len(seen)
        labels.append(seen[root])
    return labels


def random_distance_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.uniform(0.0, 1.0, size=(n, n))
    m = np.triu(m, 1)
    m = m + m.T
    np.fill_diagonal(m, 0.0)
    return m
