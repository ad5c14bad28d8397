"""The four diversity functions over a finite set and a metric oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import CapExceededError, PreconditionError
from .numeric import DistanceMatrix, MetricFn
from .tree import UltrametricTree, build_ultrametric_tree

WEITZMAN_CAP = 20
_SMALL_DP = 10


def scaled_matrix(S: Sequence, d: MetricFn) -> tuple[list[list[int]], int]:
    """Pairwise distances of ``S`` as integers plus the common denominator."""
    if isinstance(d, DistanceMatrix):
        rows = d.ints
        return [[rows[a][b] for b in S] for a in S], d.scale
    fr = [[Fraction(0) if i == j else Fraction(d(a, b)) for j, b in enumerate(S)] for i, a in enumerate(S)]
    scale = 1
    for row in fr:
        for v in row:
            scale = math.lcm(scale, v.denominator)
    return [[v.numerator * (scale // v.denominator) for v in row] for row in fr], scale


def delta_sum(S: Sequence, d: MetricFn) -> Fraction:
    """Sum of distances over unordered pairs."""
    m, scale = scaled_matrix(list(S), d)
    n = len(m)
    return Fraction(sum(m[i][j] for i in range(n) for j in range(i + 1, n)), scale)


def delta_min(S: Sequence, d: MetricFn) -> Fraction:
    m, scale = scaled_matrix(list(S), d)
    n = len(m)
    if n < 2:
        return Fraction(0)
    return Fraction(min(m[i][j] for i in range(n) for j in range(i + 1, n)), scale)


def delta_sum_min(S: Sequence, d: MetricFn) -> Fraction:
    """Each element's distance to its nearest other element, summed."""
    m, scale = scaled_matrix(list(S), d)
    n = len(m)
    if n < 2:
        return Fraction(0)
    return Fraction(sum(min(m[i][j] for j in range(n) if j != i) for i in range(n)), scale)


def _weitzman_small(m: list[list[int]]) -> int:
    n = len(m)
    full = 1 << n
    val = [0] * full
    bits = [1 << a for a in range(n)]
    for mask in range(1, full):
        members = [a for a in range(n) if mask & bits[a]]
        if len(members) < 2:
            continue
        best = -1
        for a in members:
            rest = mask ^ bits[a]
            row = m[a]
            cand = val[rest] + min(row[b] for b in members if b != a)
            if cand > best:
                best = cand
        val[mask] = best
    return val[full - 1]


def weitzman_table(m: list[list[int]]) -> np.ndarray:
    """Exact Weitzman values of every subset (indexed by bitmask) of an integer distance matrix."""
    n = len(m)
    full = 1 << n
    peak = max((max(row) for row in m), default=0)
    dtype = np.int64 if peak * (n + 1) < 2**62 else object
    M = np.array(m, dtype=dtype).reshape(n, n)
    inf = peak + 1 if dtype is object else np.iinfo(np.int64).max // 4
    # nearest[mask, a] = min distance from a to an element of mask
    nearest = np.empty((full, n), dtype=dtype)
    nearest[0] = inf
    for b in range(n):
        lo, hi = 1 << b, 1 << (b + 1)
        nearest[lo:hi] = np.minimum(nearest[0:lo], M[b])
    masks = np.arange(full, dtype=np.int64)
    popcount = np.zeros(full, dtype=np.int64)
    for b in range(n):
        popcount += (masks >> b) & 1
    val = np.zeros(full, dtype=dtype)
    for p in range(2, n + 1):
        layer = masks[popcount == p]
        best = np.zeros(len(layer), dtype=dtype)
        for a in range(n):
            has = ((layer >> a) & 1).astype(bool)
            sel = layer[has]
            sub = sel ^ (1 << a)
            cand = val[sub] + nearest[sub, a]
            best[has] = np.maximum(best[has], cand)
        val[layer] = best
    return val


def delta_weitzman_exact(S: Sequence, d: MetricFn, cap: int = WEITZMAN_CAP) -> Fraction:
    """Weitzman diversity by dynamic programming over all subsets of ``S``."""
    S = list(S)
    if len(S) > cap:
        raise CapExceededError(
            f"exact Weitzman evaluation is capped at {cap} elements (got {len(S)}); "
            "for ultrametrics use delta_weitzman_ultrametric on the ultrametric tree"
        )
    m, scale = scaled_matrix(S, d)
    if len(S) < 2:
        return Fraction(0)
    if len(S) <= _SMALL_DP:
        return Fraction(_weitzman_small(m), scale)
    return Fraction(int(weitzman_table(m)[-1]), scale)


def delta_weitzman_ultrametric(t: UltrametricTree) -> Fraction:
    """Sum over internal balls of radius times (number of children - 1)."""
    return sum(
        (t.radius[v] * (len(t.children[v]) - 1) for v in range(t.n_nodes) if t.children[v]),
        Fraction(0),
    )


def delta_weitzman(S: Sequence, d: MetricFn) -> Fraction:
    """Exact Weitzman value; large sets under a certified ultrametric go through the tree."""
    S = list(S)
    if len(S) > WEITZMAN_CAP and getattr(d, "ultrametric", False):
        if isinstance(d, DistanceMatrix):
            sub = DistanceMatrix(tuple(S), tuple(tuple(d.ints[a][b] for b in S) for a in S), d.scale, True)
            return delta_weitzman_ultrametric(build_ultrametric_tree(S, sub))
        return delta_weitzman_ultrametric(build_ultrametric_tree(S, d))
    return delta_weitzman_exact(S, d)


SUBSET = "subset"
WEAK_SUBSET = "weak-subset"
WEAK = "weak"
CLASSES = (SUBSET, WEAK_SUBSET, WEAK)

ANY_METRIC = "any"
ULTRAMETRIC = "ultrametric"


@dataclass(frozen=True)
class DiversityFunction:
    """A named diversity function with its monotonicity guarantees.

    ``guarantees`` maps a monotonicity class to the metric family under
    which it is guaranteed (``"any"`` or ``"ultrametric"``).  Classes not
    listed carry no guarantee.
    """

    name: str
    evaluate: Callable[[Sequence, MetricFn], Fraction]
    guarantees: dict

    def __call__(self, S: Sequence, d: MetricFn) -> Fraction:
        return self.evaluate(S, d)

    def is_monotone(self, cls: str, ultrametric: bool = True) -> bool:
        family = self.guarantees.get(cls)
        return family == ANY_METRIC or (family == ULTRAMETRIC and ultrametric)


SUM = DiversityFunction(
    "sum", delta_sum, {SUBSET: ANY_METRIC, WEAK_SUBSET: ANY_METRIC, WEAK: ANY_METRIC}
)
MIN = DiversityFunction(
    "min", delta_min, {SUBSET: ANY_METRIC, WEAK_SUBSET: ANY_METRIC, WEAK: ANY_METRIC}
)
WEITZMAN = DiversityFunction(
    "weitzman", delta_weitzman, {SUBSET: ULTRAMETRIC, WEAK_SUBSET: ULTRAMETRIC, WEAK: ULTRAMETRIC}
)
SUM_MIN = DiversityFunction("sum-min", delta_sum_min, {WEAK_SUBSET: ULTRAMETRIC, WEAK: ANY_METRIC})

DIVERSITY_FUNCTIONS = {f.name: f for f in (SUM, MIN, WEITZMAN, SUM_MIN)}


def get_diversity(name: str) -> DiversityFunction:
    try:
        return DIVERSITY_FUNCTIONS[name]
    except KeyError:
        raise PreconditionError(
            f"unknown diversity function {name!r}; choose from {', '.join(DIVERSITY_FUNCTIONS)}"
        ) from None
