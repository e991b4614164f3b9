"""Synthetic data generators and CSV ingestion for the application
harnesses: RSS-fingerprint localization, LoS/NLoS and sleeping-cell
classification, and the Gaussian-mixture experiment with a closed-form
Bayes risk.

All generators are pure functions of (parameters, seed): the same seed
reproduces bit-identical data.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import kdtree
from .data import Dataset
from .metrics import EUCLIDEAN, Metric

__all__ = [
    "PathLossParams",
    "FingerprintMap",
    "gen_fingerprints",
    "localize",
    "run_localization",
    "gen_los_nlos",
    "gen_sleeping_cell",
    "gen_gaussian_mixture",
    "gen_uniform",
    "CsvError",
    "load_csv",
    "write_csv",
    "load_fingerprints",
    "write_fingerprints",
    "DEFAULT_PATH_LOSS",
    "DEFAULT_AP_POSITIONS",
    "DEFAULT_GRID",
]


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path-loss model with Gaussian shadowing.

    p0 is the received level (dB) at the reference distance d0; n_exp the
    path-loss exponent; sigma the shadowing standard deviation in dB.
    Distances below d0 clamp to d0.
    """

    p0: float = -40.0
    n_exp: float = 2.5
    sigma: float = 2.0
    d0: float = 1.0

    def __post_init__(self):
        if self.n_exp < 1.0:
            raise ValueError(f"path-loss exponent must be >= 1, got {self.n_exp}")
        if self.sigma < 0.0:
            raise ValueError(f"shadowing sigma must be >= 0, got {self.sigma}")
        if not self.d0 > 0.0:
            raise ValueError(f"reference distance must be > 0, got {self.d0}")

    def mean_rss(self, dist: float) -> float:
        d = max(dist, self.d0)
        return self.p0 - 10.0 * self.n_exp * math.log10(d / self.d0)


DEFAULT_PATH_LOSS = PathLossParams()
# 20 m x 20 m hall, one access point in each corner, 1 m survey grid
DEFAULT_AP_POSITIONS = ((0.0, 0.0), (20.0, 0.0), (0.0, 20.0), (20.0, 20.0))
DEFAULT_GRID = (20.0, 20.0, 1.0)


class FingerprintMap:
    """Survey grid of reference locations with one RSS vector per location."""

    __slots__ = ("locations", "rss", "ap_positions", "_index")

    def __init__(self, locations, rss, ap_positions=None):
        loc = np.ascontiguousarray(locations, dtype=np.float64)
        r = np.ascontiguousarray(rss, dtype=np.float64)
        if loc.ndim != 2 or loc.shape[1] != 2 or loc.shape[0] != r.shape[0]:
            raise ValueError("locations must be (G, 2) parallel to rss (G, N)")
        if len(np.unique(loc, axis=0)) != loc.shape[0]:
            raise ValueError("grid locations must be distinct")
        loc.setflags(write=False)
        r.setflags(write=False)
        self.locations = loc
        self.rss = r
        self.ap_positions = None if ap_positions is None else np.asarray(ap_positions, float)
        self._index = None

    @property
    def n_aps(self) -> int:
        return self.rss.shape[1]

    def __len__(self) -> int:
        return self.rss.shape[0]

    def index(self) -> kdtree.KdTree:
        """Lazily built K-d tree over the RSS vectors."""
        if self._index is None:
            self._index = kdtree.build(Dataset(self.rss, metric=EUCLIDEAN))
        return self._index


def gen_fingerprints(params: PathLossParams, ap_positions: Sequence[Sequence[float]],
                     grid: Tuple[float, float, float], seed: int) -> FingerprintMap:
    """Survey a (width, height, spacing) grid against the given access points.

    RSS(loc, ap) = p0 - 10 n log10(max(d, d0)/d0) + N(0, sigma), one
    independent shadowing draw per (location, AP) reading.
    """
    width, height, spacing = grid
    if spacing <= 0 or width < 0 or height < 0:
        raise ValueError(f"invalid grid {grid}")
    aps = np.asarray(ap_positions, dtype=np.float64)
    if aps.ndim != 2 or aps.shape[0] < 1 or aps.shape[1] != 2:
        raise ValueError("need at least one access point with (x, y) position")
    xs = np.arange(0.0, width + spacing / 2, spacing)
    ys = np.arange(0.0, height + spacing / 2, spacing)
    locations = np.array([(x, y) for x in xs for y in ys])
    dist = np.sqrt(((locations[:, None, :] - aps[None, :, :]) ** 2).sum(axis=2))
    dist = np.maximum(dist, params.d0)
    mean = params.p0 - 10.0 * params.n_exp * np.log10(dist / params.d0)
    rng = np.random.default_rng(seed)
    rss = mean + rng.normal(0.0, params.sigma, size=mean.shape) if params.sigma > 0 else mean
    return FingerprintMap(locations, rss, aps)


def localize(fmap: FingerprintMap, x: Sequence[float], k: int = 1) -> Tuple[float, float]:
    """Estimate coordinates for one RSS reading.

    k=1 returns the nearest fingerprint's location; k>1 returns the centroid
    of the k nearest fingerprints' locations (the labels are continuous
    coordinates, so averaging replaces majority voting).
    """
    if len(x) != fmap.n_aps:
        raise ValueError(f"reading has {len(x)} entries, map has {fmap.n_aps} APs")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    hits = fmap.index().query_knn(x, k)
    locs = fmap.locations[list(hits.indices)]
    est = locs.mean(axis=0)
    return float(est[0]), float(est[1])


def _one_query(fmap, params, k, samples, seed, qidx):
    # Shadowing is a static location signature already captured in the
    # fingerprint; a query at grid point g sees that fingerprint plus
    # temporal measurement noise, averaged over a short scan window.
    rng = np.random.default_rng([seed, 1, qidx])
    g = int(rng.integers(0, len(fmap)))
    true = fmap.locations[g]
    reading = fmap.rss[g]
    if params.sigma > 0:
        reading = reading + rng.normal(
            0.0, params.sigma, size=(samples, fmap.n_aps)).mean(axis=0)
    est = localize(fmap, reading, k)
    err = math.hypot(est[0] - true[0], est[1] - true[1])
    return g, est, err


def run_localization(params: PathLossParams, ap_positions, grid, k: int,
                     n_queries: int, seed: int, jobs: int = 1,
                     samples: int = 3):
    """Monte-Carlo localization harness.

    Builds a fingerprint map (seeded), then localizes n_queries readings
    taken at random grid locations; each reading is the surveyed
    fingerprint plus temporal noise of the scenario's sigma, averaged over
    ``samples`` scans.  Per-query randomness is keyed by (seed, query
    index), so results are identical for any worker count.  Returns
    (per-query rows, summary).
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    fmap = gen_fingerprints(params, ap_positions, grid, seed=np.random.default_rng(
        [seed, 0]).integers(0, 2**63 - 1))
    fmap.index()  # build once before any fan-out
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                lambda qi: _one_query(fmap, params, k, samples, seed, qi),
                range(n_queries)))
    else:
        rows = [_one_query(fmap, params, k, samples, seed, qi)
                for qi in range(n_queries)]
    errors = sorted(r[2] for r in rows)
    summary = {
        "n_queries": n_queries,
        "k": k,
        "median_error": float(np.median(errors)),
        "p90_error": float(np.percentile(errors, 90)),
        "mean_error": float(np.mean(errors)),
    }
    return rows, summary


def gen_los_nlos(seed: int, n_los: int = 400, n_nlos: int = 400) -> Dataset:
    """Two-class (RSS, range-residual) dataset for LoS/NLoS identification.

    LoS readings have higher mean RSS and lower spread; labels are
    1 = LoS, 2 = NLoS.
    """
    if n_los < 1 or n_nlos < 1:
        raise ValueError("need at least one sample per class")
    rng = np.random.default_rng(seed)
    los = np.column_stack([
        rng.normal(-55.0, 3.0, n_los),
        rng.normal(0.3, 0.25, n_los),
    ])
    nlos = np.column_stack([
        rng.normal(-68.0, 7.0, n_nlos),
        rng.normal(1.8, 1.1, n_nlos),
    ])
    pts = np.vstack([los, nlos])
    labels = np.concatenate([np.ones(n_los, np.int64), np.full(n_nlos, 2, np.int64)])
    order = rng.permutation(len(pts))
    return Dataset(pts[order], labels[order])


def gen_sleeping_cell(seed: int, n_normal: int = 800, n_anomalous: int = 200) -> Dataset:
    """Synthetic UE measurement reports for sleeping-cell detection.

    Features per report: serving RSRP (dBm), serving SINR (dB), RACH
    success ratio, serving-minus-neighbor RSRP gap (dB).  Anomalous rows
    mimic an unalarmed outage: depressed signal quality and failing random
    access.  Labels are 1 = normal, 2 = anomalous.  The class overlap is
    deliberate; this is a synthetic stand-in, not a reproduction of any
    operator dataset.
    """
    if n_normal < 1 or n_anomalous < 1:
        raise ValueError("need at least one sample per class")
    rng = np.random.default_rng(seed)
    normal = np.column_stack([
        rng.normal(-87.0, 5.0, n_normal),
        rng.normal(10.0, 3.5, n_normal),
        np.clip(rng.normal(0.93, 0.06, n_normal), 0.0, 1.0),
        rng.normal(4.0, 2.5, n_normal),
    ])
    anomalous = np.column_stack([
        rng.normal(-97.0, 6.0, n_anomalous),
        rng.normal(4.0, 4.0, n_anomalous),
        np.clip(rng.normal(0.70, 0.15, n_anomalous), 0.0, 1.0),
        rng.normal(-1.0, 3.0, n_anomalous),
    ])
    pts = np.vstack([normal, anomalous])
    labels = np.concatenate([np.ones(n_normal, np.int64),
                             np.full(n_anomalous, 2, np.int64)])
    order = rng.permutation(len(pts))
    return Dataset(pts[order], labels[order])


def gen_gaussian_mixture(mu_sep: float, n_classes: int, n: int, seed: int,
                         dim: int = 1, sigma: float = 1.0):
    """Equal-prior isotropic Gaussian mixture with class means mu_sep apart
    along the first axis.

    Returns (dataset, bayes_risk); the Bayes risk is closed-form for two
    classes, Q(mu_sep / (2 sigma)) with Q the standard normal tail, and
    None otherwise.
    """
    if n_classes < 2:
        raise ValueError("n_classes must be >= 2")
    if n < 1 or sigma <= 0 or mu_sep < 0:
        raise ValueError("need n >= 1, sigma > 0, mu_sep >= 0")
    rng = np.random.default_rng(seed)
    labels = rng.integers(1, n_classes + 1, size=n).astype(np.int64)
    pts = rng.normal(0.0, sigma, size=(n, dim))
    pts[:, 0] += (labels - 1) * mu_sep
    r_star = None
    if n_classes == 2:
        r_star = 0.5 * math.erfc(mu_sep / (2.0 * sigma) / math.sqrt(2.0))
    return Dataset(pts, labels), r_star


def gen_uniform(n: int, dim: int, seed: int, low: float = 0.0,
                high: float = 1.0, metric: Metric = EUCLIDEAN) -> Dataset:
    """Uniform random points; the workhorse for benchmarks and examples."""
    if n < 1 or dim < 1:
        raise ValueError("need n >= 1 and dim >= 1")
    rng = np.random.default_rng(seed)
    return Dataset(rng.uniform(low, high, size=(n, dim)), metric=metric)


# -- CSV interchange -----------------------------------------------------

class CsvError(ValueError):
    """Malformed CSV input; the message carries file/line/column context."""


def load_csv(path, label_column: Optional[str] = None,
             metric: Metric = EUCLIDEAN) -> Dataset:
    """Read a header-first CSV of numeric feature columns.

    If label_column is given, that column becomes integer labels and the
    rest are features.  Malformed rows report their line number;
    non-numeric values report the offending column.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            try:
                label_idx = header.index(label_column)
            except ValueError:
                raise CsvError(
                    f"{path}: label column {label_column!r} not in header {header}") from None
        feat_idx = [i for i in range(len(header)) if i != label_idx]
        if not feat_idx:
            raise CsvError(f"{path}: no feature columns")
        points = []
        labels = [] if label_idx is not None else None
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise CsvError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            feats = []
            for i in feat_idx:
                try:
                    feats.append(float(row[i]))
                except ValueError:
                    raise CsvError(
                        f"{path}:{lineno}: non-numeric value {row[i]!r} "
                        f"in column {header[i]!r}") from None
            points.append(feats)
            if label_idx is not None:
                try:
                    labels.append(int(row[label_idx]))
                except ValueError:
                    raise CsvError(
                        f"{path}:{lineno}: non-integer label {row[label_idx]!r} "
                        f"in column {header[label_idx]!r}") from None
    if not points:
        raise CsvError(f"{path}: no data rows")
    return Dataset(points, labels=labels, metric=metric)


def write_csv(ds: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset as CSV (header row, repr floats, LF endings)."""
    dim = ds.dimension
    cols = [f"f{j}" for j in range(dim)]
    if ds.labels is not None:
        cols.append(label_column)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for i, pt in enumerate(ds.tuples()):
            row = [repr(c) for c in pt]
            if ds.labels is not None:
                row.append(str(int(ds.labels[i])))
            fh.write(",".join(row) + "\n")


def write_fingerprints(fmap: FingerprintMap, path) -> None:
    """Export a fingerprint map as CSV with columns x,y,rss_1..rss_N."""
    cols = ["x", "y"] + [f"rss_{j + 1}" for j in range(fmap.n_aps)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for loc, row in zip(fmap.locations.tolist(), fmap.rss.tolist()):
            fh.write(",".join(repr(v) for v in (*loc, *row)) + "\n")


def load_fingerprints(path) -> FingerprintMap:
    """Read a fingerprint map written by write_fingerprints."""
    ds = load_csv(path)
    if ds.dimension < 3:
        raise CsvError(f"{path}: fingerprint maps need x,y plus >= 1 RSS column")
    pts = ds.points
    return FingerprintMap(pts[:, :2], pts[:, 2:])
