"""Pure-Python query kernels (fallback backend).

These mirror the compiled kernels in nnkit._ckernels operation for
operation.  Both must produce bit-identical results: the same IEEE
arithmetic as metrics.distance (sequential left-to-right accumulation,
libm sqrt/pow), the same traversal order, the same (distance, index)
tie-breaking.  Any change here must be made in the .pyx twin as well.

Inputs are plain Python structures (lists of point tuples, list-of-int
node arrays) prepared once per tree by KdTree.
"""

import math
from heapq import heappush, heapreplace

COMPILED = False


def _dist(q, pt, mcode, p):
    if mcode == 0:  # euclidean
        s = 0.0
        for x, y in zip(q, pt):
            d = x - y
            s += d * d
        return math.sqrt(s)
    if mcode == 1:  # manhattan
        s = 0.0
        for x, y in zip(q, pt):
            s += abs(x - y)
        return s
    if mcode == 2:  # chebyshev
        s = 0.0
        for x, y in zip(q, pt):
            d = abs(x - y)
            if d > s:
                s = d
        return s
    s = 0.0  # minkowski
    for x, y in zip(q, pt):
        s += abs(x - y) ** p
    return s ** (1.0 / p)


def _gap_key(g, mcode, p):
    # Splitting-plane gap, rounded exactly like a single-axis candidate
    # distance so that prune comparisons are consistent with _dist output.
    if mcode == 0:
        return math.sqrt(g * g)
    if mcode == 3:
        return (g ** p) ** (1.0 / p)
    return g


def knn_query(pts, node_pt, left, right, naxis, root, q, k, eps, mcode, p):
    """k nearest neighbors with optional (1+eps) approximation slack.

    Returns (indices, distances, visited) with the result UNSORTED; the
    caller orders by (distance, index).  A subtree is skipped when its
    plane-gap lower bound exceeds worst/(1+eps).
    """
    one_plus_eps = 1.0 + eps
    heap = []  # (-d, -i): heap[0] is the lexicographically largest (d, i)
    visited = 0
    stack = [(root, 0.0)]
    while stack:
        node, gap = stack.pop()
        if len(heap) == k and gap > (-heap[0][0]) / one_plus_eps:
            continue
        visited += 1
        i = node_pt[node]
        pt = pts[i]
        d = _dist(q, pt, mcode, p)
        if len(heap) < k:
            heappush(heap, (-d, -i))
        else:
            wd = -heap[0][0]
            if d < wd or (d == wd and i < -heap[0][1]):
                heapreplace(heap, (-d, -i))
        ax = naxis[node]
        diff = q[ax] - pt[ax]
        if diff < 0.0:
            near = left[node]
            far = right[node]
        else:
            near = right[node]
            far = left[node]
        if far >= 0:
            g = _gap_key(abs(diff), mcode, p)
            if g < gap:  # subtree region also lies within the parent bound
                g = gap
            stack.append((far, g))
        if near >= 0:
            stack.append((near, gap))
    idx = [-ni for _, ni in heap]
    dist = [-nd for nd, _ in heap]
    return idx, dist, visited


def radius_query(pts, node_pt, left, right, naxis, root, q, rho, mcode, p):
    """All points with d(q, p) <= rho (closed ball; boundary points kept).

    Returns (indices, distances, visited), unsorted.
    """
    visited = 0
    out_i = []
    out_d = []
    stack = [(root, 0.0)]
    while stack:
        node, gap = stack.pop()
        if gap > rho:
            continue
        visited += 1
        i = node_pt[node]
        pt = pts[i]
        d = _dist(q, pt, mcode, p)
        if d <= rho:
            out_i.append(i)
            out_d.append(d)
        ax = naxis[node]
        diff = q[ax] - pt[ax]
        if diff < 0.0:
            near = left[node]
            far = right[node]
        else:
            near = right[node]
            far = left[node]
        if far >= 0:
            g = _gap_key(abs(diff), mcode, p)
            if g < gap:
                g = gap
            stack.append((far, g))
        if near >= 0:
            stack.append((near, gap))
    return out_i, out_d, visited
