"""K-d tree spatial index: median-split construction, exact and
epsilon-approximate NN/k-NN/radius queries with branch pruning.

Construction cycles the splitting dimension with depth (depth mod K) and
splits at the upper median (element at index m//2 of the subset sorted by
the split coordinate, ties sorted by dataset index).  Points whose split
coordinate equals the split value go to the right subtree, so duplicate
points degrade gracefully into a right chain instead of failing.

Every query must return results identical to the linear_scan oracle,
including (distance, index) tie-breaking; the heavy lifting happens in a
backend kernel (compiled or pure Python, see _backend).
"""

from __future__ import annotations

from dataclasses import dataclass
from types import SimpleNamespace
from typing import Iterator, Optional, Sequence

import numpy as np

from ._backend import Backend, get_backend
from .data import Dataset, NeighborList
from .metrics import parse_metric

__all__ = ["KdTree", "TreeStats", "build", "FORMAT_VERSION"]

FORMAT_VERSION = "nnkit-kdtree/1"


@dataclass(frozen=True)
class TreeStats:
    """Instrumentation snapshot for the bench harness."""

    nodes_visited_last_query: Optional[int]
    depth: int
    node_count: int
    build_comparisons: int


def build(ds: Dataset, backend: Optional[str] = None) -> "KdTree":
    """Build a K-d tree over a nonempty dataset.

    Runs iteratively (no recursion limit on degenerate duplicate chains);
    node ids are assigned in pre-order, so identical input always yields a
    bit-identical tree.  build_comparisons counts point-vs-median coordinate
    comparisons, one per subset element at each split: Theta(n log n) on
    balanced data.
    """
    pts = ds.points
    n, dim = pts.shape
    node_pt = np.empty(n, dtype=np.int64)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    naxis = np.empty(n, dtype=np.int64)

    next_id = 0
    levels = 0
    comparisons = 0
    root = 0
    # stack entries: (subset indices, depth, parent id, which child slot)
    stack = [(np.arange(n, dtype=np.int64), 0, -1, 0)]
    while stack:
        idxs, depth, parent, slot = stack.pop()
        nid = next_id
        next_id += 1
        ax = depth % dim
        naxis[nid] = ax
        if depth + 1 > levels:
            levels = depth + 1
        if parent >= 0:
            if slot == 1:
                left[parent] = nid
            else:
                right[parent] = nid

        m = idxs.shape[0]
        if m == 1:
            node_pt[nid] = idxs[0]
            continue

        vals = pts[idxs, ax]
        order = np.lexsort((idxs, vals))
        sidx = idxs[order]
        svals = vals[order]
        mid = m // 2  # upper median
        key = sidx[mid]
        split = svals[mid]
        # strictly-smaller coordinates go left; ties on the split value go right
        first_ge = int(np.searchsorted(svals, split, side="left"))
        sub1 = sidx[:first_ge]
        sub2 = np.concatenate((sidx[first_ge:mid], sidx[mid + 1:]))
        node_pt[nid] = key
        comparisons += m
        # push right first so the left subtree is numbered next (pre-order)
        if sub2.shape[0]:
            stack.append((sub2, depth + 1, nid, 2))
        if sub1.shape[0]:
            stack.append((sub1, depth + 1, nid, 1))

    return KdTree(ds, node_pt, left, right, naxis, root, levels, comparisons,
                  backend=backend)


class KdTree:
    """Immutable space-partitioning index over a Dataset.

    Built via :func:`build` or :meth:`KdTree.from_text`; concurrent queries
    are safe (each query keeps its counters local and publishes the visited
    count in a single write at the end).
    """

    __slots__ = ("dataset", "_node_pt", "_left", "_right", "_naxis", "_root",
                 "_levels", "_build_comparisons", "_backend", "_last_visited",
                 "_pure")

    def __init__(self, dataset, node_pt, left, right, naxis, root, levels,
                 build_comparisons, backend: Optional[str] = None):
        self.dataset = dataset
        self._node_pt = node_pt
        self._left = left
        self._right = right
        self._naxis = naxis
        self._root = int(root)
        self._levels = int(levels)
        self._build_comparisons = int(build_comparisons)
        self._backend = get_backend(backend)
        self._last_visited: Optional[int] = None
        self._pure = None

    # -- basic properties -------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.dataset)

    @property
    def dimension(self) -> int:
        return self.dataset.dimension

    @property
    def metric(self):
        return self.dataset.metric

    @property
    def backend_name(self) -> str:
        return self._backend.name

    def stats(self) -> TreeStats:
        return TreeStats(self._last_visited, self._levels, self.size,
                         self._build_comparisons)

    # -- queries -----------------------------------------------------------

    def _pure_inputs(self):
        if self._pure is None:
            self._pure = SimpleNamespace(
                pts=self.dataset.tuples(),
                node_pt=self._node_pt.tolist(),
                left=self._left.tolist(),
                right=self._right.tolist(),
                naxis=self._naxis.tolist(),
            )
        return self._pure

    def _knn(self, q: Sequence[float], k: int, eps: float) -> NeighborList:
        qt = self.dataset.check_query(q)
        m = self.metric
        if self._backend.compiled:
            qa = np.asarray(qt, dtype=np.float64)
            idx, dist, visited = self._backend.module.knn_query(
                self.dataset.points, self._node_pt, self._left, self._right,
                self._naxis, self._root, self._levels + 8, qa, k, eps,
                m.code, m.p_value)
            pairs = sorted(zip(dist.tolist(), idx.tolist()))
        else:
            pu = self._pure_inputs()
            idx, dist, visited = self._backend.module.knn_query(
                pu.pts, pu.node_pt, pu.left, pu.right, pu.naxis, self._root,
                qt, k, eps, m.code, m.p_value)
            pairs = sorted(zip(dist, idx))
        self._last_visited = int(visited)
        return NeighborList([(i, d) for d, i in pairs])

    def query_nn(self, q: Sequence[float]) -> NeighborList:
        """Exact nearest neighbor; identical to linear_scan.scan_nn."""
        return self._knn(q, 1, 0.0)

    def query_knn(self, q: Sequence[float], k: int) -> NeighborList:
        """Exact k nearest neighbors (k > n clamps to n)."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return self._knn(q, min(k, self.size), 0.0)

    def query_ann(self, q: Sequence[float], epsilon: float) -> NeighborList:
        """(1+epsilon)-approximate NN; epsilon=0 degenerates to query_nn.

        Subtrees are skipped when their plane-gap distance to q exceeds
        (current best)/(1+epsilon), so the returned distance is at most
        (1+epsilon) times the exact NN distance.
        """
        if not epsilon >= 0.0:
            raise ValueError(f"epsilon must be >= 0, got {epsilon}")
        return self._knn(q, 1, float(epsilon))

    def query_radius(self, q: Sequence[float], rho: float) -> NeighborList:
        """All points in the closed ball d(q, .) <= rho, sorted by (d, index)."""
        if not rho >= 0.0:
            raise ValueError(f"radius must be >= 0, got {rho}")
        qt = self.dataset.check_query(q)
        m = self.metric
        if self._backend.compiled:
            qa = np.asarray(qt, dtype=np.float64)
            idx, dist, visited = self._backend.module.radius_query(
                self.dataset.points, self._node_pt, self._left, self._right,
                self._naxis, self._root, self._levels + 8, qa, float(rho),
                m.code, m.p_value)
            pairs = sorted(zip(dist.tolist(), idx.tolist()))
        else:
            pu = self._pure_inputs()
            idx, dist, visited = self._backend.module.radius_query(
                pu.pts, pu.node_pt, pu.left, pu.right, pu.naxis, self._root,
                qt, float(rho), m.code, m.p_value)
            pairs = sorted(zip(dist, idx))
        self._last_visited = int(visited)
        return NeighborList([(i, d) for d, i in pairs])

    # -- traversal / audit ---------------------------------------------------

    def indices_inorder(self) -> Iterator[int]:
        """Dataset indices by in-order traversal (enumerates all n points)."""
        stack = []
        node = self._root
        while stack or node >= 0:
            while node >= 0:
                stack.append(node)
                node = self._left[node]
            node = stack.pop()
            yield int(self._node_pt[node])
            node = self._right[node]

    def _preorder(self):
        """Yield (node id, depth, side) in pre-order; side in {root, L, R}."""
        stack = [(self._root, 0, "root")]
        while stack:
            node, depth, side = stack.pop()
            yield node, depth, side
            if self._right[node] >= 0:
                stack.append((self._right[node], depth + 1, "R"))
            if self._left[node] >= 0:
                stack.append((self._left[node], depth + 1, "L"))

    def validate_structure(self) -> None:
        """Full-tree audit of the K-d node invariants; raises on violation.

        Checks, for every node P with discriminator j: all keys in the left
        subtree have coordinate j <= key_j(P) and all keys in the right
        subtree have coordinate j >= key_j(P) (audited against the entire
        subtrees, not just children); the discriminator equals depth mod K;
        and the tree enumerates each dataset index exactly once.
        """
        pts = self.dataset.points
        dim = self.dimension
        order = list(self._preorder())
        seen = sorted(int(self._node_pt[node]) for node, _, _ in order)
        if seen != list(range(self.size)):
            raise ValueError("tree does not enumerate the dataset exactly once")
        n = self.size
        lo = np.empty((n, dim))
        hi = np.empty((n, dim))
        for node, depth, _ in reversed(order):
            if self._naxis[node] != depth % dim:
                raise ValueError(f"node {node}: discriminator != depth mod K")
            key = pts[self._node_pt[node]]
            lo[node] = key
            hi[node] = key
            for child in (self._left[node], self._right[node]):
                if child >= 0:
                    np.minimum(lo[node], lo[child], out=lo[node])
                    np.maximum(hi[node], hi[child], out=hi[node])
            j = self._naxis[node]
            if self._left[node] >= 0 and not hi[self._left[node]][j] <= key[j]:
                raise ValueError(f"node {node}: left subtree exceeds key on axis {j}")
            if self._right[node] >= 0 and not lo[self._right[node]][j] >= key[j]:
                raise ValueError(f"node {node}: right subtree below key on axis {j}")

    # -- serialization ---------------------------------------------------------

    def to_text(self) -> str:
        """Versioned line-oriented dump (golden-file format).

        Header, then one node per line in pre-order:
        depth, discriminator, side (root/L/R), leaf flag, dataset index,
        key coordinates.  Floats use repr for exact round-tripping.
        """
        lines = [
            f"{FORMAT_VERSION} n={self.size} dim={self.dimension} "
            f"metric={self.metric} comparisons={self._build_comparisons}"
        ]
        pts = self.dataset.tuples()
        for node, depth, side in self._preorder():
            i = int(self._node_pt[node])
            kind = "leaf" if (self._left[node] < 0 and self._right[node] < 0) else "node"
            coords = " ".join(repr(c) for c in pts[i])
            lines.append(f"{depth} {int(self._naxis[node])} {side} {kind} {i} {coords}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, backend: Optional[str] = None) -> "KdTree":
        """Reconstruct a tree (and its dataset) from the to_text format."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty tree file")
        header = lines[0].split()
        if not header or header[0] != FORMAT_VERSION:
            raise ValueError(f"unsupported tree format header: {lines[0]!r}")
        fields = dict(part.split("=", 1) for part in header[1:])
        n = int(fields["n"])
        dim = int(fields["dim"])
        metric = parse_metric(fields["metric"])
        comparisons = int(fields.get("comparisons", 0))
        if len(lines) - 1 != n:
            raise ValueError(f"expected {n} node lines, found {len(lines) - 1}")

        points = np.empty((n, dim), dtype=np.float64)
        node_pt = np.empty(n, dtype=np.int64)
        left = np.full(n, -1, dtype=np.int64)
        right = np.full(n, -1, dtype=np.int64)
        naxis = np.empty(n, dtype=np.int64)
        path = []  # (node id, depth) ancestors of the current line
        levels = 0
        seen = set()
        for nid, ln in enumerate(lines[1:]):
            parts = ln.split()
            depth, disc, side, kind = int(parts[0]), int(parts[1]), parts[2], parts[3]
            idx = int(parts[4])
            coords = [float(c) for c in parts[5:]]
            if len(coords) != dim or idx in seen or not 0 <= idx < n:
                raise ValueError(f"bad node line: {ln!r}")
            seen.add(idx)
            points[idx] = coords
            node_pt[nid] = idx
            naxis[nid] = disc
            levels = max(levels, depth + 1)
            while path and path[-1][1] >= depth:
                path.pop()
            if side == "root":
                if depth != 0 or path:
                    raise ValueError("misplaced root line")
            else:
                if not path or path[-1][1] != depth - 1:
                    raise ValueError(f"orphan node line: {ln!r}")
                parent = path[-1][0]
                if side == "L":
                    left[parent] = nid
                else:
                    right[parent] = nid
            path.append((nid, depth))

        ds = Dataset(points, metric=metric)
        return cls(ds, node_pt, left, right, naxis, 0, levels, comparisons,
                   backend=backend)
