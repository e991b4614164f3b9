"""Brute-force O(d*n) reference search.

This module is the correctness oracle for the K-d tree: every accelerated
query must reproduce its output exactly, including index tie-breaking.
It is deliberately kept transparently simple - a Python loop over the
scalar reference ``metrics.distance`` - and must stay that way.
"""

from __future__ import annotations

from typing import Sequence

from .data import Dataset, NeighborList
from .metrics import distance

__all__ = ["scan_nn", "scan_knn", "scan_radius"]


def _all_distances(ds: Dataset, q: Sequence[float]):
    qt = ds.check_query(q)
    return [(distance(ds.metric, qt, pt), i) for i, pt in enumerate(ds.tuples())]


def scan_nn(ds: Dataset, q: Sequence[float]) -> NeighborList:
    """Nearest point to q; ties broken by smallest dataset index."""
    best = min(_all_distances(ds, q))
    return NeighborList([(best[1], best[0])])


def scan_knn(ds: Dataset, q: Sequence[float], k: int) -> NeighborList:
    """The min(k, n) nearest points, sorted by (distance, index)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dists = sorted(_all_distances(ds, q))
    return NeighborList([(i, d) for d, i in dists[: min(k, len(dists))]])


def scan_radius(ds: Dataset, q: Sequence[float], rho: float) -> NeighborList:
    """All points with d(q, p) <= rho (closed ball), sorted by (distance, index)."""
    if not rho >= 0.0:
        raise ValueError(f"radius must be >= 0, got {rho}")
    hits = sorted((d, i) for d, i in _all_distances(ds, q) if d <= rho)
    return NeighborList([(i, d) for d, i in hits])
