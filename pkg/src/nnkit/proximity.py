"""Remaining proximity problems: Euclidean minimum spanning tree and
diameter search over the complete distance graph of a dataset.

Both run dense O(n^2) algorithms on purpose: edge weights are all pairwise
distances, datasets are desk-scale, and enumerating pairs keeps the code
auditable against brute-force oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .data import Dataset
from .metrics import distance

__all__ = ["EdgeList", "mst", "diameter"]


@dataclass(frozen=True)
class EdgeList:
    """Undirected weighted edges (i, j, weight) with i < j."""

    edges: Tuple[Tuple[int, int, float], ...]

    def __post_init__(self):
        for i, j, w in self.edges:
            if not i < j:
                raise ValueError(f"edge ({i}, {j}) must satisfy i < j")
            if not w >= 0.0:
                raise ValueError(f"edge weight must be >= 0, got {w}")

    @property
    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)


def mst(ds: Dataset) -> EdgeList:
    """Minimum spanning tree of the complete graph weighted by distance.

    Dense Prim's algorithm over the implicit complete graph; no explicit
    edge list is materialized.  Tie-breaking is deterministic (lowest
    candidate index first) but only the total weight is canonical when
    equal-weight edges exist.  n=1 yields an empty edge list.
    """
    pts = ds.tuples()
    n = len(pts)
    m = ds.metric
    if n == 1:
        return EdgeList(())
    in_tree = [False] * n
    best_dist = [float("inf")] * n
    best_from = [0] * n
    in_tree[0] = True
    for j in range(1, n):
        best_dist[j] = distance(m, pts[0], pts[j])
    edges: List[Tuple[int, int, float]] = []
    for _ in range(n - 1):
        nxt = -1
        nd = float("inf")
        for j in range(n):
            if not in_tree[j] and best_dist[j] < nd:
                nd = best_dist[j]
                nxt = j
        a, b = best_from[nxt], nxt
        edges.append((min(a, b), max(a, b), nd))
        in_tree[nxt] = True
        for j in range(n):
            if not in_tree[j]:
                d = distance(m, pts[nxt], pts[j])
                if d < best_dist[j]:
                    best_dist[j] = d
                    best_from[j] = nxt
    edges.sort()
    return EdgeList(tuple(edges))


def diameter(ds: Dataset) -> Tuple[int, int, float]:
    """The maximally distant pair of points, by exhaustive pair scan.

    Returns (i, j, distance) with i < j; ties broken by lexicographic (i, j).
    Requires n >= 2.
    """
    pts = ds.tuples()
    n = len(pts)
    if n < 2:
        raise ValueError(f"diameter needs at least 2 points, got {n}")
    m = ds.metric
    bi, bj, bd = 0, 1, -1.0
    for i in range(n):
        for j in range(i + 1, n):
            d = distance(m, pts[i], pts[j])
            if d > bd:
                bi, bj, bd = i, j, d
    return bi, bj, bd
