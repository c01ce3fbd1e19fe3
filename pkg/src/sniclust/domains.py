"""SNI parsing and the hierarchical domain distance.

A domain is split on dots, the literal leading label "www" is dropped, and
the remaining labels are indexed right to left: TLD held separately, the
second-level domain at index 0, the third level at index 1, and so on.
Mismatches near the registrable part of the name cost more: 1/2 for the
SLD, 1/3 for the TLD, and (1 - 0.01*s)/i for the level-i labels (third
level i=3, fourth i=4, ...) where s is a 0-100 fuzzy similarity built on
the Levenshtein distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ingest import unique_by_first_seen


@dataclass(frozen=True)
class ParsedDomain:
    """SNI decomposed into TLD plus right-to-left indexed components."""

    original: str
    tld: str
    components: tuple[str, ...]

    @property
    def depth(self) -> int:
        return len(self.components)

    def parsed_key(self) -> tuple:
        # Equality key at the parsed level: "www.x.com" and "x.com" compare equal.
        return (self.tld, self.components)


@dataclass(frozen=True)
class DistanceParams:
    tld_weight: float = 1.0 / 3.0
    sld_weight: float = 1.0 / 2.0
    fuzzy_floor_level: int = 3  # levels >= this are compared fuzzily

    def __post_init__(self) -> None:
        if self.tld_weight <= 0 or self.sld_weight <= 0:
            raise ValueError("level weights must be positive")


def parse_domain(sni: str) -> ParsedDomain:
    """Lower-case, strip a leading literal "www", split into components.

    Single-label names get an empty TLD so the function stays total over
    real-world SNI noise.
    """
    if not sni:
        raise ValueError("empty SNI")
    name = sni.strip().lower().rstrip(".")
    labels = name.split(".") if name else [""]
    if len(labels) > 2 and labels[0] == "www":
        labels = labels[1:]
    if len(labels) == 1:
        return ParsedDomain(original=sni, tld="", components=(labels[0],))
    return ParsedDomain(original=sni, tld=labels[-1], components=tuple(reversed(labels[:-1])))


def levenshtein(a: str, b: str) -> int:
    """Edit distance, iterative two-row dynamic program."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def fuzzy_similarity(a: str, b: str) -> int:
    """Similarity score in [0, 100]; 100 iff the strings are equal."""
    if a == b:
        return 100
    longest = max(len(a), len(b))
    s = int(round(100.0 * (1.0 - levenshtein(a, b) / longest)))
    # Rounding must not collapse near-identical long strings onto 100,
    # which is reserved for exact equality.
    return min(s, 99)


def _level_contributions(
    a: ParsedDomain, b: ParsedDomain, p: DistanceParams
) -> list[dict]:
    """Per-level breakdown of the raw distance (also the debug CLI output)."""
    out: list[dict] = []
    if a.tld != b.tld:
        out.append({"level": "tld", "a": a.tld, "b": b.tld, "contribution": p.tld_weight})
    if a.components[0] != b.components[0]:
        out.append(
            {
                "level": "sld",
                "a": a.components[0],
                "b": b.components[0],
                "contribution": p.sld_weight,
            }
        )
    for j in range(1, max(a.depth, b.depth)):
        la: Optional[str] = a.components[j] if j < a.depth else None
        lb: Optional[str] = b.components[j] if j < b.depth else None
        level = j + 2  # third-level domain is level 3
        if la is None or lb is None:
            s = 0
        elif level >= p.fuzzy_floor_level:
            s = fuzzy_similarity(la, lb)
        else:
            s = 100 if la == lb else 0
        contribution = (1.0 - 0.01 * s) * (1.0 / level)
        if contribution != 0.0:
            out.append(
                {"level": level, "a": la, "b": lb, "similarity": s, "contribution": contribution}
            )
    return out


def raw_distance(a: ParsedDomain, b: ParsedDomain, p: DistanceParams = DistanceParams()) -> float:
    """Unnormalized hierarchical distance; 0 iff the parsed forms are equal."""
    return sum(item["contribution"] for item in _level_contributions(a, b, p))


def max_raw_distance(p: DistanceParams, max_depth: int) -> float:
    """Largest possible raw distance between domains of depth <= max_depth."""
    return p.tld_weight + p.sld_weight + sum(1.0 / i for i in range(3, max_depth + 2))


def normalized_distance(
    a: ParsedDomain,
    b: ParsedDomain,
    p: DistanceParams = DistanceParams(),
    max_depth: int = 1,
) -> float:
    """raw_distance scaled into [0, 1] by the deepest shape in the dataset."""
    d = raw_distance(a, b, p) / max_raw_distance(p, max_depth)
    return min(max(d, 0.0), 1.0)


def domain_distance_matrix(
    domains: Sequence[str], p: DistanceParams = DistanceParams()
) -> tuple[np.ndarray, np.ndarray, int]:
    """Normalized pairwise distances over distinct SNI strings.

    Returns (matrix, uindex, max_depth); uindex maps each input position to
    its row in the unique-level matrix (first-seen order).
    """
    firsts, uindex = unique_by_first_seen(list(domains))
    parsed = [parse_domain(domains[i]) for i in firsts]
    max_depth = max(d.depth for d in parsed)
    denom = max_raw_distance(p, max_depth)
    u = len(parsed)
    matrix = np.zeros((u, u))
    for i in range(u):
        for j in range(i + 1, u):
            d = min(max(raw_distance(parsed[i], parsed[j], p) / denom, 0.0), 1.0)
            matrix[i, j] = d
            matrix[j, i] = d
    return matrix, uindex, max_depth
