"""Distance functions on the metric space and machine-checkable metric axioms.

Every search, proximity and classification routine in this package is
defined relative to one of the metrics below.  The scalar ``distance``
function here is the single reference definition: the accelerated query
kernels reproduce its arithmetic operation-for-operation so that results
(including ties) are bit-identical across code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

__all__ = [
    "Metric",
    "EUCLIDEAN",
    "MANHATTAN",
    "CHEBYSHEV",
    "minkowski",
    "parse_metric",
    "distance",
    "AxiomReport",
    "check_metric_axioms",
]

_KINDS = ("euclidean", "manhattan", "chebyshev", "minkowski")

# numeric codes shared with the query kernels
_EUCLIDEAN_CODE = 0
_MANHATTAN_CODE = 1
_CHEBYSHEV_CODE = 2
_MINKOWSKI_CODE = 3


@dataclass(frozen=True)
class Metric:
    """A distance metric tag: Euclidean, Manhattan, Chebyshev or Minkowski(p).

    Minkowski requires p >= 1; p < 1 breaks the triangle inequality and is
    rejected at construction.
    """

    kind: str
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "minkowski":
            if self.p is None or not math.isfinite(self.p):
                raise ValueError("minkowski metric requires a finite p")
            if self.p < 1.0:
                raise ValueError(f"minkowski p must be >= 1, got {self.p}")
            object.__setattr__(self, "p", float(self.p))
        elif self.p is not None:
            raise ValueError(f"{self.kind} metric takes no p parameter")

    @property
    def code(self) -> int:
        return _KINDS.index(self.kind)

    @property
    def p_value(self) -> float:
        """p as a plain float for kernel calls (0.0 when unused)."""
        return self.p if self.p is not None else 0.0

    def __str__(self) -> str:
        if self.kind == "minkowski":
            return f"minkowski:{self.p!r}"
        return self.kind


EUCLIDEAN = Metric("euclidean")
MANHATTAN = Metric("manhattan")
CHEBYSHEV = Metric("chebyshev")


def minkowski(p: float) -> Metric:
    return Metric("minkowski", p)


def parse_metric(text: str) -> Metric:
    """Parse a CLI-style metric spec: 'euclidean', 'chebyshev', 'minkowski:3'."""
    name, _, param = text.partition(":")
    name = name.strip().lower()
    if name == "minkowski":
        if not param:
            raise ValueError("minkowski metric needs a parameter, e.g. 'minkowski:3'")
        return Metric("minkowski", float(param))
    if param:
        raise ValueError(f"metric {name!r} takes no parameter")
    return Metric(name)


def distance(m: Metric, a: Sequence[float], b: Sequence[float]) -> float:
    """d(a, b) for the given metric.

    Coordinates are accumulated left to right; the result is invariant under
    swapping a and b at the bit level, which downstream tie-breaking relies
    on.  Raises ValueError on dimension mismatch.
    """
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    kind = m.kind
    if kind == "euclidean":
        s = 0.0
        for x, y in zip(a, b):
            d = x - y
            s += d * d
        return math.sqrt(s)
    if kind == "manhattan":
        s = 0.0
        for x, y in zip(a, b):
            s += abs(x - y)
        return s
    if kind == "chebyshev":
        s = 0.0
        for x, y in zip(a, b):
            d = abs(x - y)
            if d > s:
                s = d
        return s
    # minkowski
    p = m.p
    s = 0.0
    for x, y in zip(a, b):
        s += abs(x - y) ** p
    return s ** (1.0 / p)


DistanceFn = Callable[[Sequence[float], Sequence[float]], float]


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of checking the three metric axioms over a point sample.

    ``counterexample`` holds the first failing tuple as
    (axiom name, points involved, offending values), or None.
    """

    positive: bool
    symmetric: bool
    triangle: bool
    counterexample: Optional[tuple] = None

    @property
    def all_pass(self) -> bool:
        return self.positive and self.symmetric and self.triangle


def check_metric_axioms(
    m: Union[Metric, DistanceFn],
    sample: Sequence[Sequence[float]],
    rel_tol: float = 1e-9,
) -> AxiomReport:
    """Evaluate positivity, symmetry and the triangle inequality on a sample.

    ``m`` may be a Metric or any callable d(a, b); the latter allows checking
    deliberately broken pseudo-metrics.  Positivity requires d > 0 for
    coordinate-distinct pairs (coordinate-equal points are treated as equal
    objects).  Symmetry and the triangle inequality are checked to a relative
    tolerance that only absorbs floating-point rounding: the axioms themselves
    must hold analytically.
    """
    if len(sample) == 0:
        raise ValueError("sample must be nonempty")
    dim = len(sample[0])
    for pt in sample:
        if len(pt) != dim:
            raise ValueError("sample points must share one dimension")

    if isinstance(m, Metric):
        d = lambda a, b: distance(m, a, b)
    else:
        d = m

    pts = [tuple(float(x) for x in pt) for pt in sample]
    n = len(pts)
    dmat = [[d(pts[i], pts[j]) for j in range(n)] for i in range(n)]

    positive = True
    symmetric = True
    triangle = True
    counterexample = None

    for i in range(n):
        for j in range(n):
            if positive and pts[i] != pts[j] and not dmat[i][j] > 0.0:
                positive = False
                counterexample = counterexample or (
                    "positive", (pts[i], pts[j]), dmat[i][j])
            if symmetric and i < j:
                gap = abs(dmat[i][j] - dmat[j][i])
                if gap > rel_tol * max(abs(dmat[i][j]), abs(dmat[j][i])):
                    symmetric = False
                    counterexample = counterexample or (
                        "symmetric", (pts[i], pts[j]), (dmat[i][j], dmat[j][i]))

    for i in range(n):
        for j in range(n):
            for k in range(n):
                lhs = dmat[i][j]
                rhs = dmat[i][k] + dmat[j][k]
                if lhs > rhs + rel_tol * max(lhs, rhs):
                    triangle = False
                    counterexample = counterexample or (
                        "triangle", (pts[i], pts[j], pts[k]), (lhs, rhs))
                    return AxiomReport(positive, symmetric, triangle, counterexample)

    return AxiomReport(positive, symmetric, triangle, counterexample)
