"""k-NN classification: min-max normalization, seeded train/test split,
K-d tree backed majority vote, and error-rate evaluation against the
Bayes-risk bounds for the nearest-neighbor rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import kdtree, linear_scan
from .data import Dataset
from .metrics import EUCLIDEAN, Metric, parse_metric

__all__ = [
    "TrainingSet",
    "KnnModel",
    "EvalReport",
    "normalize_fit",
    "apply_ranges",
    "split",
    "fit",
    "predict",
    "evaluate",
    "bayes_bounds",
    "save_model",
    "load_model",
]

MODEL_FORMAT_VERSION = "nnkit-knn-model/1"


class TrainingSet:
    """Labeled samples (points, labels in 1..M) plus optional normalization.

    ``ranges`` is None for raw data; after normalize_fit it holds the
    per-feature (min, max) captured from this data, and points lie in [0,1].
    """

    __slots__ = ("points", "labels", "n_classes", "ranges")

    def __init__(self, points, labels, n_classes: Optional[int] = None,
                 ranges: Optional[Tuple[Tuple[float, float], ...]] = None):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        lab = np.ascontiguousarray(labels, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("training set must be a nonempty (n, dim) array")
        if not np.isfinite(pts).all():
            raise ValueError("training coordinates must be finite")
        if lab.shape != (pts.shape[0],):
            raise ValueError("labels must parallel the points")
        if lab.min() < 1:
            raise ValueError("labels must be >= 1")
        if n_classes is None:
            n_classes = int(lab.max())
        if n_classes < 2:
            raise ValueError("a training set needs at least 2 classes")
        if lab.max() > n_classes:
            raise ValueError(f"label {lab.max()} exceeds n_classes={n_classes}")
        if ranges is not None:
            ranges = tuple((float(a), float(b)) for a, b in ranges)
            if len(ranges) != pts.shape[1]:
                raise ValueError("one (min, max) range per feature required")
            if any(b < a for a, b in ranges):
                raise ValueError("normalization ranges need max >= min")
        pts.setflags(write=False)
        lab.setflags(write=False)
        self.points = pts
        self.labels = lab
        self.n_classes = n_classes
        self.ranges = ranges

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_dataset(cls, ds: Dataset, n_classes: Optional[int] = None) -> "TrainingSet":
        if ds.labels is None:
            raise ValueError("dataset has no labels")
        return cls(ds.points, ds.labels, n_classes=n_classes)


def normalize_fit(ts: TrainingSet) -> TrainingSet:
    """Map each feature by (x - min)/(max - min) into [0, 1].

    Constant features map to 0.  The captured ranges ride along on the
    returned set so future queries can be transformed identically.
    """
    mins = ts.points.min(axis=0)
    maxs = ts.points.max(axis=0)
    span = maxs - mins
    safe = np.where(span > 0.0, span, 1.0)
    pts = (ts.points - mins) / safe
    pts[:, span == 0.0] = 0.0
    ranges = tuple(zip(mins.tolist(), maxs.tolist()))
    return TrainingSet(pts, ts.labels, n_classes=ts.n_classes, ranges=ranges)


def apply_ranges(ranges, q: Sequence[float]) -> Tuple[float, ...]:
    """Transform one query point with stored (min, max) ranges.

    Constant training features (max == min) contribute 0 regardless of the
    query value, mirroring their training-time mapping.
    """
    if len(q) != len(ranges):
        raise ValueError(f"query dimension {len(q)} != model dimension {len(ranges)}")
    out = []
    for x, (mn, mx) in zip(q, ranges):
        out.append((float(x) - mn) / (mx - mn) if mx > mn else 0.0)
    return tuple(out)


def split(ts: TrainingSet, alpha: float, seed: int) -> Tuple[TrainingSet, TrainingSet]:
    """Deterministic seeded partition: floor(alpha*n) train, rest test.

    Degenerate splits (empty train or test side) are rejected.
    """
    n = len(ts)
    n_train = math.floor(alpha * n + 1e-9)
    if n_train < 1 or n - n_train < 1:
        raise ValueError(
            f"alpha={alpha} with n={n} leaves an empty train or test side")
    perm = np.random.default_rng(seed).permutation(n)
    tr, te = perm[:n_train], perm[n_train:]
    return (
        TrainingSet(ts.points[tr], ts.labels[tr], ts.n_classes, ts.ranges),
        TrainingSet(ts.points[te], ts.labels[te], ts.n_classes, ts.ranges),
    )


class KnnModel:
    """Immutable fitted k-NN classifier over a K-d tree index."""

    __slots__ = ("tree", "labels", "k", "metric", "n_classes", "ranges")

    def __init__(self, tree: kdtree.KdTree, labels, k: int, metric: Metric,
                 n_classes: int, ranges):
        self.tree = tree
        self.labels = labels
        self.k = k
        self.metric = metric
        self.n_classes = n_classes
        self.ranges = ranges

    @property
    def dimension(self) -> int:
        return self.tree.dimension


def fit(train: TrainingSet, k: int, metric: Metric = EUCLIDEAN,
        backend: Optional[str] = None) -> KnnModel:
    """Normalize the training data and index it; k must be in [1, n].

    An already-normalized set (ranges present) is indexed as-is.
    """
    if not 1 <= k <= len(train):
        raise ValueError(f"k={k} must be within [1, {len(train)}]")
    norm = train if train.ranges is not None else normalize_fit(train)
    ds = Dataset(norm.points, metric=metric)
    tree = kdtree.build(ds, backend=backend)
    return KnnModel(tree, norm.labels, k, metric, norm.n_classes, norm.ranges)


def _vote(neighbors, labels) -> int:
    counts = {}
    nearest = {}
    for i, d in neighbors:  # sorted by (distance, index)
        lab = int(labels[i])
        counts[lab] = counts.get(lab, 0) + 1
        if lab not in nearest:
            nearest[lab] = d
    top = max(counts.values())
    return min((nearest[lab], lab) for lab, c in counts.items() if c == top)[1]


def predict(model: KnnModel, q: Sequence[float], via: str = "kdtree") -> int:
    """Majority label among the k nearest training points.

    Vote ties go to the label whose nearest representative is closest to q;
    a residual tie picks the smallest label.  ``via="scan"`` answers through
    the linear-scan oracle instead of the tree (for equivalence testing).
    """
    qn = apply_ranges(model.ranges, q)
    if via == "kdtree":
        neighbors = model.tree.query_knn(qn, model.k)
    elif via == "scan":
        neighbors = linear_scan.scan_knn(model.tree.dataset, qn, model.k)
    else:
        raise ValueError(f"unknown search route {via!r}")
    return _vote(neighbors, model.labels)


@dataclass(frozen=True)
class EvalReport:
    """Error rate, confusion counts, and optional Bayes-bound comparison.

    confusion[t][p] counts test samples of true label t+1 predicted as p+1.
    When a Bayes risk is supplied, bound_low/bound_high hold the
    nearest-neighbor error-probability bounds R* and R*(2 - M R*/(M-1)).
    """

    error_rate: float
    confusion: np.ndarray
    n_test: int
    bayes_risk: Optional[float] = None
    bound_low: Optional[float] = None
    bound_high: Optional[float] = None

    @property
    def accuracy(self) -> float:
        return 1.0 - self.error_rate


def evaluate(model: KnnModel, test: TrainingSet, r_star: Optional[float] = None,
             via: str = "kdtree") -> EvalReport:
    """Classify every test sample and tally the confusion matrix."""
    if test.dimension != model.dimension:
        raise ValueError("test dimension does not match the model")
    if test.labels.max() > model.n_classes:
        raise ValueError("test labels exceed the model's class count")
    m = model.n_classes
    confusion = np.zeros((m, m), dtype=np.int64)
    for row, true in zip(test.points, test.labels):
        pred = predict(model, row, via=via)
        confusion[true - 1, pred - 1] += 1
    n = len(test)
    err = 1.0 - confusion.trace() / n
    low = high = None
    if r_star is not None:
        low, high = bayes_bounds(r_star, m)
    return EvalReport(err, confusion, n, r_star, low, high)


def bayes_bounds(r_star: float, n_classes: int) -> Tuple[float, float]:
    """NN error-probability bounds (R*, R*(2 - M R*/(M-1))) for M classes.

    A Bayes risk cannot exceed (M-1)/M (random guessing); inputs outside
    [0, (M-1)/M] are rejected.
    """
    if n_classes < 2:
        raise ValueError("n_classes must be >= 2")
    if not 0.0 <= r_star < 1.0:
        raise ValueError(f"Bayes risk must be in [0, 1), got {r_star}")
    if r_star > (n_classes - 1) / n_classes:
        raise ValueError(
            f"Bayes risk {r_star} exceeds (M-1)/M for M={n_classes}")
    high = r_star * (2.0 - (n_classes * r_star) / (n_classes - 1))
    return r_star, high


def save_model(model: KnnModel, path) -> None:
    """Write the model as a reproducible CSV-with-header sidecar.

    Stored points are the normalized training points; together with the
    ranges, k and metric they fully determine the model.
    """
    dim = model.dimension
    lines = [
        f"# {MODEL_FORMAT_VERSION}",
        f"# k={model.k}",
        f"# metric={model.metric}",
        f"# n_classes={model.n_classes}",
    ]
    for j, (mn, mx) in enumerate(model.ranges):
        lines.append(f"# range_{j}={mn!r},{mx!r}")
    lines.append(",".join([f"f{j}" for j in range(dim)] + ["label"]))
    pts = model.tree.dataset.tuples()
    for pt, lab in zip(pts, model.labels):
        lines.append(",".join([repr(c) for c in pt] + [str(int(lab))]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path, backend: Optional[str] = None) -> KnnModel:
    """Rebuild a model from its save_model export."""
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# {MODEL_FORMAT_VERSION}":
            raise ValueError(f"unsupported model file header: {first!r}")
        header_seen = False
        for ln in fh:
            ln = ln.strip()
            if not ln:
                continue
            if ln.startswith("#"):
                key, _, val = ln[1:].strip().partition("=")
                meta[key] = val
            elif not header_seen:
                header_seen = True  # column names; layout is fixed
            else:
                rows.append(ln.split(","))
    k = int(meta["k"])
    metric = parse_metric(meta["metric"])
    n_classes = int(meta["n_classes"])
    dim = len(rows[0]) - 1
    ranges = []
    for j in range(dim):
        mn, mx = meta[f"range_{j}"].split(",")
        ranges.append((float(mn), float(mx)))
    pts = [[float(c) for c in row[:-1]] for row in rows]
    labels = [int(row[-1]) for row in rows]
    norm = TrainingSet(pts, labels, n_classes=n_classes, ranges=tuple(ranges))
    return fit(norm, k, metric, backend=backend)
