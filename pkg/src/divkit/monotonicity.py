"""Randomized checkers for the three replacement-monotonicity classes.

An instance is ``(A, B, B2, d)``: ``A`` is disjoint from ``B`` and ``B2``,
``|B| = |B2|``, ``delta(B) <= delta(B2)``, and for every ``a`` in ``A`` and
position ``i`` the distance ``d(a, B[i])`` relates to ``d(a, B2[i])`` by
``<=`` (subset), ``==`` (weak-subset), or ``<=`` with singleton ``B``
(weak).  The class is monotone if then ``delta(A | B) <= delta(A | B2)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .diversity import SUBSET, WEAK, WEAK_SUBSET, DiversityFunction
from .errors import PreconditionError
from .numeric import RuleMetric


@dataclass(frozen=True)
class MonotonicityInstance:
    A: tuple
    B: tuple
    B2: tuple
    d: Callable


@dataclass(frozen=True)
class MonotonicityResult:
    passed: bool
    trials: int
    counterexample: MonotonicityInstance | None = None
    values: tuple[Fraction, Fraction] | None = None

    def __bool__(self) -> bool:
        return self.passed


Sampler = Callable[[random.Random, DiversityFunction, str], MonotonicityInstance]


def hypotheses_hold(inst: MonotonicityInstance, delta: DiversityFunction, cls: str) -> bool:
    A, B, B2, d = inst.A, inst.B, inst.B2, inst.d
    if len(B) != len(B2) or not B:
        return False
    if len(set(B)) != len(B) or len(set(B2)) != len(B2) or len(set(A)) != len(A):
        return False
    if set(A) & set(B) or set(A) & set(B2):
        return False
    if cls == WEAK and len(B) != 1:
        return False
    if delta(B, d) > delta(B2, d):
        return False
    for a in A:
        for b, b2 in zip(B, B2):
            if cls == WEAK_SUBSET:
                if d(a, b) != d(a, b2):
                    return False
            elif d(a, b) > d(a, b2):
                return False
    return True


def check_monotonicity(
    delta: DiversityFunction, cls: str, sampler: Sampler, trials: int, seed: int = 0
) -> MonotonicityResult:
    """Sample ``trials`` hypothesis-satisfying instances; report the first violation."""
    if cls not in (SUBSET, WEAK_SUBSET, WEAK):
        raise PreconditionError(f"unknown monotonicity class {cls!r}")
    rng = random.Random(seed)
    for t in range(1, trials + 1):
        inst = sampler(rng, delta, cls)
        if not hypotheses_hold(inst, delta, cls):
            raise PreconditionError("sampler produced an instance violating the class hypotheses")
        left = delta(inst.A + inst.B, inst.d)
        right = delta(inst.A + inst.B2, inst.d)
        if left > right:
            return MonotonicityResult(False, t, inst, (left, right))
    return MonotonicityResult(True, trials)


class _Table:
    """Symmetric dictionary-backed metric used by the samplers."""

    def __init__(self, dist: dict, ultrametric: bool):
        self.dist = dist
        self.ultrametric = ultrametric

    def __call__(self, a, b) -> Fraction:
        if a == b:
            return Fraction(0)
        return self.dist[(a, b) if (a, b) in self.dist else (b, a)]


def _sizes(rng: random.Random, cls: str, max_a: int, max_b: int) -> tuple[int, int]:
    return rng.randint(1, max_a), 1 if cls == WEAK else rng.randint(1, max_b)


def bounded_ratio_sampler(max_a: int = 3, max_b: int = 3, lo: int = 10) -> Sampler:
    """Random metrics with every distance in ``[lo, 2*lo]``; any such assignment is a metric.

    The distances towards ``A`` are forced into the class relation, and the
    internal distances of ``B`` and ``B2`` are exchanged whenever that is
    needed for ``delta(B) <= delta(B2)``.
    """

    def sample(rng: random.Random, delta: DiversityFunction, cls: str) -> MonotonicityInstance:
        na, nb = _sizes(rng, cls, max_a, max_b)
        A = tuple(("a", i) for i in range(na))
        B = tuple(("b", i) for i in range(nb))
        B2 = tuple(("c", i) for i in range(nb))
        pts = A + B + B2
        dist = {}
        for i, x in enumerate(pts):
            for y in pts[i + 1 :]:
                dist[x, y] = Fraction(rng.randint(lo, 2 * lo))
        for a in A:
            for b, b2 in zip(B, B2):
                x, y = dist[a, b], dist[a, b2]
                if cls == WEAK_SUBSET:
                    dist[a, b2] = x
                elif x > y:
                    dist[a, b], dist[a, b2] = y, x
        d = _Table(dist, ultrametric=False)
        if delta(B, d) > delta(B2, d):
            for i in range(nb):
                for j in range(i + 1, nb):
                    p, q = (B[i], B[j]), (B2[i], B2[j])
                    dist[p], dist[q] = dist[q], dist[p]
        return MonotonicityInstance(A, B, B2, d)

    return sample


def _lcp(x: tuple, y: tuple) -> int:
    i = 0
    while i < len(x) and x[i] == y[i]:
        i += 1
    return i


def string_ultrametric(radii: Sequence[Fraction]) -> Callable:
    """Ultrametric on equal-length strings: ``radii[l]`` for a longest common prefix of length ``l``."""

    def rule(x, y):
        return radii[_lcp(x, y)]

    return RuleMetric(rule, ultrametric=True)


def random_ultrametric_sampler(
    max_a: int = 3, max_b: int = 3, length: int = 4, alphabet: int = 3, max_tries: int = 1000
) -> Sampler:
    """Random string ultrametrics with random strictly decreasing radii per prefix level.

    For the weak-subset class ``B2[i]`` copies ``B[i]`` past the deepest
    branching point towards ``A``, which forces equal distances to all of
    ``A``; the other classes use rejection.
    """

    def word(rng):
        return tuple(rng.randrange(alphabet) for _ in range(length))

    def sample(rng: random.Random, delta: DiversityFunction, cls: str) -> MonotonicityInstance:
        for _ in range(max_tries):
            radii = sorted({Fraction(rng.randint(1, 64), rng.choice((1, 2, 4))) for _ in range(length)}, reverse=True)
            while len(radii) < length:
                radii.append(radii[-1] / 2)
            d = string_ultrametric(radii)
            na, nb = _sizes(rng, cls, max_a, max_b)
            A = set()
            while len(A) < na:
                A.add(word(rng))
            A = tuple(sorted(A))
            B = []
            while len(B) < nb:
                w = word(rng)
                if w not in A and w not in B:
                    B.append(w)
            B2 = []
            for b in B:
                if cls == WEAK_SUBSET:
                    keep = max(_lcp(a, b) for a in A) + 1
                    w = b[:keep] + word(rng)[keep:]
                else:
                    keep = rng.randint(0, length - 1)
                    w = b[:keep] + word(rng)[keep:]
                B2.append(w)
            inst = MonotonicityInstance(A, tuple(B), tuple(B2), d)
            if hypotheses_hold(inst, delta, cls):
                return inst
            swapped = MonotonicityInstance(A, tuple(B2), tuple(B), d)
            if cls == WEAK_SUBSET and hypotheses_hold(swapped, delta, cls):
                return swapped
        raise PreconditionError("could not sample a hypothesis-satisfying instance")

    return sample


def weitzman_counterexample() -> MonotonicityInstance:
    """Sets on which Weitzman diversity violates subset monotonicity.

    Distances are 1 between each ``a``-``b_i``, ``b_i``-``c_j``,
    ``b_i``-``c'_j``, ``c_i``-``d_j``, ``c'_i``-``d'_j``, ``c_i``-``c_j``
    and ``d'_1``-``d'_2``; all other distinct pairs are at distance 2.
    """
    A = ("a", "b1", "b2", "b3")
    C = ("c1", "c2", "c3")
    D = ("d1", "d2")
    C2 = ("c'1", "c'2", "c'3")
    D2 = ("d'1", "d'2")
    close = set()
    for b in A[1:]:
        close.add(frozenset(("a", b)))
        for c in C + C2:
            close.add(frozenset((b, c)))
    for c in C:
        for x in D:
            close.add(frozenset((c, x)))
    for c in C2:
        for x in D2:
            close.add(frozenset((c, x)))
    for i, c in enumerate(C):
        for c_other in C[i + 1 :]:
            close.add(frozenset((c, c_other)))
    close.add(frozenset(D2))

    def rule(x, y):
        return 1 if frozenset((x, y)) in close else 2

    return MonotonicityInstance(A, C + D, C2 + D2, RuleMetric(rule))


def fixed_sampler(inst: MonotonicityInstance) -> Sampler:
    def sample(rng, delta, cls):
        return inst

    return sample
