"""Reference implementations that share no code with the package's solvers."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations


def weitzman_by_orders(S, d) -> Fraction:
    """Max over removal orders of the summed nearest-remaining distances."""
    S = list(S)
    if len(S) <= 1:
        return Fraction(0)
    best = None
    for order in permutations(S):
        total = Fraction(0)
        for i in range(len(order) - 1):
            total += min(d(order[i], b) for b in order[i + 1 :])
        best = total if best is None or total > best else best
    return best


def enumerate_balls(S, d) -> set[tuple[Fraction, frozenset]]:
    """All closed balls B(a, q) over observed radii q, each paired with its diameter."""
    S = list(S)
    radii = {Fraction(0)} | {d(a, b) for a, b in combinations(S, 2)}
    out = set()
    for a in S:
        for q in radii:
            ball = frozenset(b for b in S if b == a or d(a, b) <= q)
            diam = max((d(x, y) for x, y in combinations(sorted(ball, key=str), 2)), default=Fraction(0))
            out.add((diam, ball))
    return out


def best_k_subset(S, k, value) -> Fraction:
    return max(value(list(c)) for c in combinations(S, k))


def pair_sum(S, d) -> Fraction:
    return sum((d(a, b) for a, b in combinations(S, 2)), Fraction(0))
