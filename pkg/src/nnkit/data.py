"""Core value types: points, datasets and query results."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from .metrics import EUCLIDEAN, Metric

__all__ = ["as_point", "Dataset", "NeighborList"]


def as_point(coords: Sequence[float]) -> Tuple[float, ...]:
    """Validate and normalize a point: finite coordinates, dimension >= 1."""
    pt = tuple(float(x) for x in coords)
    if len(pt) == 0:
        raise ValueError("point must have dimension >= 1")
    for x in pt:
        if not np.isfinite(x):
            raise ValueError(f"point coordinates must be finite, got {x}")
    return pt


class Dataset:
    """An immutable set of points (optionally labeled) plus its metric.

    Points are stored as a C-contiguous float64 array of shape (n, dim).
    Coordinates must be finite; all points share one dimension.  Labels,
    when present, form a parallel int64 array.
    """

    __slots__ = ("points", "labels", "metric", "_tuples")

    def __init__(self, points, labels=None, metric: Metric = EUCLIDEAN):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("points must be a nonempty (n, dim) array")
        if not np.isfinite(pts).all():
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        self.points = pts
        if labels is not None:
            lab = np.ascontiguousarray(labels, dtype=np.int64)
            if lab.shape != (pts.shape[0],):
                raise ValueError("labels must be a length-n parallel array")
            lab.setflags(write=False)
            self.labels = lab
        else:
            self.labels = None
        self.metric = metric
        self._tuples: Optional[list] = None

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def tuples(self) -> list:
        """Points as a cached list of float tuples (for scalar code paths)."""
        if self._tuples is None:
            self._tuples = [tuple(row) for row in self.points.tolist()]
        return self._tuples

    def point(self, i: int) -> Tuple[float, ...]:
        return self.tuples()[i]

    def check_query(self, q: Sequence[float]) -> Tuple[float, ...]:
        qt = as_point(q)
        if len(qt) != self.dimension:
            raise ValueError(
                f"query dimension {len(qt)} does not match dataset dimension {self.dimension}")
        return qt


class NeighborList:
    """An ordered query result: (dataset index, distance) pairs.

    Distances are non-decreasing and indices distinct; both are enforced at
    construction.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[Tuple[int, float]]):
        ent = tuple((int(i), float(d)) for i, d in entries)
        for (i1, d1), (i2, d2) in zip(ent, ent[1:]):
            if d2 < d1:
                raise ValueError("neighbor distances must be non-decreasing")
        if len({i for i, _ in ent}) != len(ent):
            raise ValueError("neighbor indices must be distinct")
        self.entries = ent

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def distances(self) -> Tuple[float, ...]:
        return tuple(d for _, d in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def __eq__(self, other):
        if isinstance(other, NeighborList):
            return self.entries == other.entries
        return NotImplemented

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"NeighborList({list(self.entries)!r})"
