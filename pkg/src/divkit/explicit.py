"""k-diverse subsets of an explicitly given set: tree DP and brute-force oracle."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

from .diversity import WEAK_SUBSET, DiversityFunction
from .errors import CapExceededError, PreconditionError
from .numeric import DistanceMatrix, MetricFn
from .tree import UltrametricTree, build_ultrametric_tree

ORACLE_CAP = 10**6
ORACLE_CAP_ENV = "DIVKIT_ORACLE_CAP"


def oracle_cap() -> int:
    raw = os.environ.get(ORACLE_CAP_ENV)
    if raw is None:
        return ORACLE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise PreconditionError(f"{ORACLE_CAP_ENV} must be a positive integer, got {raw!r}") from None
    if cap <= 0:
        raise PreconditionError(f"{ORACLE_CAP_ENV} must be a positive integer, got {raw!r}")
    return cap


@dataclass
class Selection:
    """A chosen subset (element payloads), its diversity and solver counters."""

    elements: tuple
    value: Fraction
    stats: dict = field(default_factory=dict)


def brute_force_oracle(S: Sequence, d: MetricFn, k: int, delta: DiversityFunction, cap: int | None = None) -> Selection:
    """Exhaustive argmax over k-subsets; ties go to the lexicographically smallest id sequence."""
    S = list(S)
    n = len(S)
    if not 1 <= k <= n:
        raise PreconditionError(f"k must satisfy 1 <= k <= |S| = {n}, got {k}")
    cap = oracle_cap() if cap is None else cap
    total = comb(n, k)
    if total > cap:
        raise CapExceededError(f"brute force would enumerate {total} subsets, above the cap of {cap}")
    dm = d if isinstance(d, DistanceMatrix) and tuple(S) == tuple(range(n)) else DistanceMatrix.from_oracle(S, d)
    best_ids, best = None, None
    for ids in combinations(range(n), k):
        value = delta(ids, dm)
        if best is None or value > best:
            best_ids, best = ids, value
    return Selection(tuple(S[i] for i in best_ids), best, {"ids": best_ids, "delta_evaluations": total})


class _Evaluator:
    def __init__(self, delta: DiversityFunction, dm: DistanceMatrix):
        self.delta = delta
        self.dm = dm
        self.calls = 0

    def __call__(self, ids: tuple) -> Fraction:
        self.calls += 1
        if len(ids) < 2:
            return Fraction(0)
        return self.delta(ids, self.dm)


def _merge(left: list, right: list, limit: int, evaluate: _Evaluator) -> list:
    """Combine two candidate tables over disjoint balls; ties keep the smallest left share."""
    out = []
    for i in range(min(limit, len(left) - 1 + len(right) - 1) + 1):
        best = None
        for j1 in range(max(0, i - (len(right) - 1)), min(i, len(left) - 1) + 1):
            ids = tuple(sorted(left[j1][0] + right[i - j1][0]))
            value = evaluate(ids)
            if best is None or value > best[1]:
                best = (ids, value)
        out.append(best)
    return out


def candidate_tables(t: UltrametricTree, dm: DistanceMatrix, k: int, delta: DiversityFunction) -> tuple[list, _Evaluator]:
    """Per-node tables ``C[v][i] = (i element ids, value)`` for ``i = 0..min(k, |v|)``."""
    evaluate = _Evaluator(delta, dm)
    tables: list = [None] * t.n_nodes
    # children have larger preorder ids than their parent
    for v in reversed(range(t.n_nodes)):
        if t.is_leaf(v):
            tables[v] = [((), Fraction(0)), ((t.leaf[v],), Fraction(0))]
            continue
        kids = t.children[v]
        acc = tables[kids[0]]
        for c in kids[1:]:
            acc = _merge(acc, tables[c], k, evaluate)
            tables[c] = None
        tables[kids[0]] = None
        tables[v] = acc
    return tables, evaluate


def solve_explicit_dp(
    S: Sequence, u: MetricFn, k: int, delta: DiversityFunction, tree: UltrametricTree | None = None
) -> Selection:
    """Optimal k-subset under an ultrametric for a weakly subset-monotone diversity function.

    Runs bottom-up over the ultrametric tree; each internal ball folds its
    children left to right, so intermediate tables stand for the unions of
    the first ``m`` children.
    """
    S = list(S)
    n = len(S)
    if k <= 1 or k > n:
        raise PreconditionError(f"k must satisfy 1 < k <= |S| = {n}, got {k}")
    if not delta.is_monotone(WEAK_SUBSET, ultrametric=True):
        raise PreconditionError(f"diversity {delta.name!r} is not weakly subset-monotone on ultrametrics")
    dm = DistanceMatrix.from_oracle(S, u, ultrametric=True)
    if tree is None:
        tree = build_ultrametric_tree(S, dm)
    tables, evaluate = candidate_tables(tree, dm, k, delta)
    ids, value = tables[tree.root][k]
    return Selection(tuple(S[i] for i in ids), value, {"ids": ids, "delta_evaluations": evaluate.calls})
