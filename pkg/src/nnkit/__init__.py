"""nnkit: nearest-neighbor search and classification toolkit.

Metric-space proximity problems (NN / k-NN / fixed-radius / approximate
NN, minimum spanning tree, diameter), a K-d tree index with a brute-force
oracle, a k-NN classifier with Bayes-bound evaluation, and desk-scale
harnesses for RSS-fingerprint localization and KPI anomaly detection.

The query hot path runs on compiled Cython kernels when the extension is
available and falls back to a pure-Python twin otherwise; see
``active_backend()``.
"""

from ._backend import available_backends, default_backend_name
from .classifier import (EvalReport, KnnModel, TrainingSet, bayes_bounds,
                         evaluate, fit, load_model, normalize_fit, predict,
                         save_model, split)
from .data import Dataset, NeighborList, as_point
from .kdtree import KdTree, TreeStats, build
from .linear_scan import scan_knn, scan_nn, scan_radius
from .metrics import (CHEBYSHEV, EUCLIDEAN, MANHATTAN, AxiomReport, Metric,
                      check_metric_axioms, distance, minkowski, parse_metric)
from .proximity import EdgeList, diameter, mst
from .synth_data import (CsvError, FingerprintMap, PathLossParams,
                         gen_fingerprints, gen_gaussian_mixture, gen_los_nlos,
                         gen_sleeping_cell, gen_uniform, load_csv, localize,
                         run_localization, write_csv)

__version__ = "0.1.0"


def active_backend() -> str:
    """Name of the query-kernel backend selected at import time."""
    return default_backend_name()
