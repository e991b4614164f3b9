"""Benchmark harness: index scaling measurements and the compiled-vs-pure
backend comparison.

Visited-node counts are deterministic and are what the CLI asserts on;
wall-clock timings are informational (first iteration discarded as
warm-up).
"""

from __future__ import annotations

import time
from typing import Optional, Sequence

import numpy as np

from . import kdtree
from ._backend import available_backends
from .synth_data import gen_uniform

__all__ = ["scaling_run", "backend_comparison", "available_backends"]


def scaling_run(sizes: Sequence[int], dim: int, n_queries: int, seed: int,
                backend: Optional[str] = None) -> list:
    """Build/query statistics for uniform data at each size.

    Returns one row per size: build seconds, build comparisons, depth,
    mean visited nodes for exact NN via the tree, and the linear-scan
    visit count (n, by definition).
    """
    rows = []
    prev_visited = None
    for n in sizes:
        ds = gen_uniform(n, dim, seed=[seed, n, 0])
        t0 = time.perf_counter()
        tree = kdtree.build(ds, backend=backend)
        build_s = time.perf_counter() - t0
        rng = np.random.default_rng([seed, n, 1])
        queries = rng.uniform(0.0, 1.0, size=(n_queries, dim))
        visited = []
        t0 = time.perf_counter()
        for q in queries:
            tree.query_nn(q)
            visited.append(tree.stats().nodes_visited_last_query)
        query_s = time.perf_counter() - t0
        mean_visited = float(np.mean(visited))
        st = tree.stats()
        row = {
            "n": n,
            "dim": dim,
            "build_seconds": build_s,
            "build_comparisons": st.build_comparisons,
            "depth": st.depth,
            "node_count": st.node_count,
            "mean_visited_tree": mean_visited,
            "visited_scan": n,
            "mean_query_seconds": query_s / n_queries,
            "visited_growth_ratio": (
                mean_visited / prev_visited if prev_visited else None),
        }
        prev_visited = mean_visited
        rows.append(row)
    return rows


def backend_comparison(n: int, dim: int, n_queries: int, seed: int, k: int = 5) -> list:
    """k-NN query throughput of every available backend on the same tree.

    One warm-up pass per backend is discarded.  Results (not just timings)
    are required to be identical across backends; this function asserts it.
    """
    ds = gen_uniform(n, dim, seed=[seed, 2])
    rng = np.random.default_rng([seed, 3])
    queries = rng.uniform(0.0, 1.0, size=(n_queries, dim))
    rows = []
    reference = None
    for name in available_backends():
        tree = kdtree.build(ds, backend=name)
        tree.query_knn(queries[0], k)  # warm-up
        t0 = time.perf_counter()
        results = [tree.query_knn(q, k) for q in queries]
        elapsed = time.perf_counter() - t0
        if reference is None:
            reference = results
        elif results != reference:
            raise AssertionError(f"backend {name} disagrees with reference results")
        rows.append({
            "backend": name,
            "n": n,
            "dim": dim,
            "k": k,
            "queries_per_second": n_queries / elapsed if elapsed > 0 else float("inf"),
            "mean_query_seconds": elapsed / n_queries,
        })
    return rows
