"""Implicitly represented ultrametric trees and the two solvers that walk them."""

from __future__ import annotations

from abc import ABC, abstractmethod
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Callable, Hashable, Iterator

from .diversity import SUBSET, WEAK, WEITZMAN, DiversityFunction
from .errors import CapExceededError, InvariantError, PreconditionError
from .explicit import Selection, oracle_cap
from .numeric import DistanceMatrix
from .tree import UltrametricTree


class ChildIterator:
    """Stateful walk over a ball's children.

    ``init`` positions ``current`` on the first child; ``next`` advances
    and returns False once the children are exhausted.  Every child
    visited is cached in ``seen`` so a finished walk can be replayed.
    """

    def __init__(self, produce: Callable[[], Iterator[Hashable]]):
        self._produce = produce
        self._gen: Iterator[Hashable] | None = None
        self.seen: list[Hashable] = []
        self.current: Hashable | None = None
        self.exhausted = False

    def init(self) -> None:
        self._gen = iter(self._produce())
        self.seen = []
        self.exhausted = False
        if not self._advance():
            raise InvariantError("a non-singleton ball must have children")

    def _advance(self) -> bool:
        try:
            self.current = next(self._gen)
        except StopIteration:
            self.exhausted = True
            return False
        self.seen.append(self.current)
        return True

    def next(self) -> bool:
        if self._gen is None:
            raise InvariantError("child iterator used before init")
        if self.exhausted:
            return False
        return self._advance()

    def all(self) -> list[Hashable]:
        """Initialise and walk to the end, returning every child."""
        self.init()
        while self.next():
            pass
        return list(self.seen)


class ImplicitTree(ABC):
    """Root / children / member access to a ball hierarchy.

    Contract: members of the first child equal the member of the ball, and
    every non-singleton ball has at least two children.  ``ultrametric``
    certifies that ``distance`` is the tree's ultrametric.
    """

    ultrametric = True

    def __init__(self):
        self.stats = {"children_steps": 0, "members": 0}

    @abstractmethod
    def root(self) -> Hashable: ...

    @abstractmethod
    def _children(self, ball: Hashable) -> Iterator[Hashable]: ...

    @abstractmethod
    def _member(self, ball: Hashable) -> Hashable: ...

    @abstractmethod
    def is_singleton(self, ball: Hashable) -> bool: ...

    @abstractmethod
    def distance(self, x: Hashable, y: Hashable) -> Fraction: ...

    def children(self, ball: Hashable) -> ChildIterator:
        def produce():
            for child in self._children(ball):
                self.stats["children_steps"] += 1
                yield child

        return ChildIterator(produce)

    def member(self, ball: Hashable) -> Hashable:
        self.stats["members"] += 1
        return self._member(ball)

    def decode(self, element: Hashable):
        """Human-facing form of an element."""
        return element

    def __call__(self, x: Hashable, y: Hashable) -> Fraction:
        return self.distance(x, y)

    def leaves(self) -> list[Hashable]:
        """Every element, by exhaustive traversal (tests and small instances only)."""
        out = []
        stack = [self.root()]
        while stack:
            ball = stack.pop()
            if self.is_singleton(ball):
                out.append(self.member(ball))
                continue
            stack.extend(reversed(self.children(ball).all()))
        return out

    def balls(self) -> list[Hashable]:
        """Every ball id in preorder (tests and small instances only)."""
        out = []
        stack = [self.root()]
        while stack:
            ball = stack.pop()
            out.append(ball)
            if self.is_singleton(ball):
                continue
            stack.extend(reversed(self.children(ball).all()))
        return out


class ExplicitTreeHandle(ImplicitTree):
    """Adapter presenting an :class:`UltrametricTree` through the implicit interface.

    Elements are the tree's element ids; the member of a ball is its
    smallest id, which lies in the first child since children are ordered
    by minimum id.
    """

    def __init__(self, t: UltrametricTree):
        super().__init__()
        self.tree = t

    def root(self) -> int:
        return self.tree.root

    def _children(self, ball: int) -> Iterator[int]:
        return iter(self.tree.children[ball])

    def _member(self, ball: int) -> int:
        return self.tree.min_element(ball)

    def is_singleton(self, ball: int) -> bool:
        return self.tree.is_leaf(ball)

    def distance(self, x: int, y: int) -> Fraction:
        return self.tree.distance(x, y) if x != y else Fraction(0)

    def decode(self, element: int):
        return self.tree.items[element]

    def radius(self, ball: int) -> Fraction:
        return self.tree.radius[ball]


def explicit_backed_handle(t: UltrametricTree) -> ExplicitTreeHandle:
    return ExplicitTreeHandle(t)


def _nearest(h: ImplicitTree, x, S) -> Fraction:
    return min(h.distance(x, s) for s in S)


def greedy_diverse(
    h: ImplicitTree, k: int, delta: DiversityFunction, incremental: bool | None = None
) -> Selection:
    """Greedy ball-frontier selection (optimal for subset-monotone diversity functions).

    The frontier holds balls whose child walk is still live; each round adds
    the member of the current child of the ball whose candidate raises the
    diversity most.  A ball whose walk finishes is replaced by its
    non-singleton children.  ``incremental`` selects the ``+ u(x, S)``
    update for Weitzman diversity, defaulting to on when the handle
    certifies an ultrametric.
    """
    if k < 1:
        raise PreconditionError(f"k must be positive, got {k}")
    if not delta.is_monotone(SUBSET, ultrametric=h.ultrametric):
        raise PreconditionError(f"greedy selection requires a subset-monotone diversity function, not {delta.name!r}")
    if incremental is None:
        incremental = delta is WEITZMAN and h.ultrametric
    stats = {"delta_evaluations": 0, "balls_touched": 0, "max_frontier": 0, "rounds": 0}
    members: dict = {}

    def member(ball):
        if ball not in members:
            members[ball] = h.member(ball)
        return members[ball]

    root = h.root()
    S = [member(root)]
    value = Fraction(0)
    frontier: list = []  # discovery order: (ball, iterator)
    if not h.is_singleton(root):
        it = h.children(root)
        it.init()
        it.next()
        frontier.append((root, it))
    while len(S) < k and frontier:
        stats["rounds"] += 1
        stats["max_frontier"] = max(stats["max_frontier"], len(frontier))
        if len(frontier) > k:
            raise InvariantError(f"frontier grew to {len(frontier)} balls, above k = {k}")
        best = None
        for pos, (ball, it) in enumerate(frontier):
            x = member(it.current)
            if incremental:
                cand = value + _nearest(h, x, S)
            else:
                stats["delta_evaluations"] += 1
                cand = delta(S + [x], h)
            # frontier order is discovery order, so strict improvement keeps the earliest ball
            if best is None or cand > best[0]:
                best = (cand, pos, x)
        value, pos, x = best
        S.append(x)
        ball, it = frontier[pos]
        if not it.next():
            del frontier[pos]
            for child in it.seen:
                if not h.is_singleton(child):
                    cit = h.children(child)
                    cit.init()
                    cit.next()
                    frontier.append((child, cit))
    if len(S) < k:
        raise PreconditionError(f"the represented set has only {len(S)} elements, fewer than k = {k}")
    stats["balls_touched"] = len(members)
    return Selection(tuple(S), value, stats)


def relevant_elements(h: ImplicitTree, ball, budget: int, stats: dict | None = None) -> list:
    """Elements among which some optimal ``budget``-subset of the ball can be found."""
    if stats is not None:
        stats["balls_touched"] = stats.get("balls_touched", 0) + 1
    if budget == 1 or h.is_singleton(ball):
        return [h.member(ball)]
    it = h.children(ball)
    it.init()
    collected = [it.current]
    while len(collected) < budget and it.next():
        collected.append(it.current)
    out = []
    for child in collected:
        out.extend(relevant_elements(h, child, budget - len(collected) + 1, stats))
    return out


def fpt_diverse(h: ImplicitTree, k: int, delta: DiversityFunction, cap: int | None = None) -> Selection:
    """Exact selection for weakly monotone diversity functions in time exponential only in k."""
    if k < 1:
        raise PreconditionError(f"k must be positive, got {k}")
    if not delta.is_monotone(WEAK, ultrametric=h.ultrametric):
        raise PreconditionError(f"diversity {delta.name!r} is not weakly monotone for this metric")
    stats: dict = {"balls_touched": 0}
    relevant = relevant_elements(h, h.root(), k, stats)
    stats["relevant"] = len(relevant)
    if len(relevant) > 2**k:
        raise InvariantError(f"{len(relevant)} relevant elements exceed the bound 2^k = {2**k}")
    if len(relevant) < k:
        raise PreconditionError(f"the represented set has only {len(relevant)} elements, fewer than k = {k}")
    cap = oracle_cap() if cap is None else cap
    total = comb(len(relevant), k)
    if total > cap:
        raise CapExceededError(f"exhaustive search over {total} subsets of the relevant set exceeds the cap of {cap}")
    dm = DistanceMatrix.from_oracle(relevant, h, ultrametric=h.ultrametric)
    best = None
    for ids in combinations(range(len(relevant)), k):
        value = delta(ids, dm) if k > 1 else Fraction(0)
        if best is None or value > best[1]:
            best = (ids, value)
    stats["delta_evaluations"] = total
    return Selection(tuple(relevant[i] for i in best[0]), best[1], stats)
