"""Implicit ultrametric trees over query answers under the relational ultrametric.

A ball is identified by a maximal common prefix of head values.  The basic
engine recomputes admissible next values by semijoin propagation after each
binding; the layered engine precomputes, for every head position, an index
from the relevant earlier values to the admissible values.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterator

from .cq.database import Database
from .cq.jointree import JoinTree, build_join_tree, find_disruptive_trio, gyo, is_free_connex, neighbors
from .cq.query import ConjunctiveQuery
from .cq.yannakakis import AtomCopy, ReducedInstance, semijoin, yannakakis_reduce
from .errors import EmptyAnswerError, InvariantError, PreconditionError
from .explicit import Selection
from .implicit import ImplicitTree
from .numeric import urel_distance

Prefix = tuple[int, ...]


def prefix_radius(prefix: Prefix, arity: int) -> Fraction:
    if len(prefix) >= arity:
        return Fraction(0)
    return Fraction(1, 2 ** (len(prefix) + 1))


class _AnswerTree(ImplicitTree):
    """Shared plumbing: elements are head-value tuples of interned ids."""

    def __init__(self, q: ConjunctiveQuery, db: Database):
        super().__init__()
        self.query = q
        self.db = db
        self.arity = len(q.head)

    def distance(self, x, y) -> Fraction:
        return urel_distance(x, y)

    def decode(self, element):
        return self.db.decode(element)

    def is_singleton(self, ball: Prefix) -> bool:
        return len(ball) == self.arity

    def radius(self, ball: Prefix) -> Fraction:
        return prefix_radius(ball, self.arity)


class PrefixTreeHandle(_AnswerTree):
    """Prefix balls computed on demand from semijoin-reduced atom copies."""

    def __init__(self, q: ConjunctiveQuery, db: Database):
        super().__init__(q, db)
        tree = build_join_tree(q)
        if not isinstance(tree, JoinTree):
            raise PreconditionError(f"query is not acyclic (GYO residue atoms {list(tree.residue)})")
        self.tree = tree
        self.reduced: ReducedInstance = yannakakis_reduce(q, db, tree)
        self.holders = {v: [i for i, a in enumerate(q.atoms) if v in a.varset] for v in q.variables}
        self._orientations: dict[int, tuple] = {}
        self._states: dict[Prefix, tuple[AtomCopy, ...]] = {}
        self._root: Prefix | None = None

    def _oriented(self, root: int):
        if root not in self._orientations:
            self._orientations[root] = self.tree.rooted(root)
        return self._orientations[root]

    def admissible(self, state: tuple[AtomCopy, ...], var: str) -> list[int]:
        copy = state[self.holders[var][0]]
        col = copy.column(var)
        return sorted({row[col] for row in copy.rows})

    def bind(self, state: tuple[AtomCopy, ...], var: str, value: int) -> tuple[AtomCopy, ...]:
        """Restrict ``var`` to ``value`` and restore global consistency.

        Only the atoms holding ``var`` shrink directly; they form a connected
        subtree, so rooting there needs a bottom-up pass inside that subtree
        and a top-down pass that stops below unchanged atoms.
        """
        holders = self.holders[var]
        parent, children, order = self._oriented(holders[0])
        copies = list(state)
        changed = [False] * len(copies)
        for i in holders:
            c = copies[i]
            col = c.column(var)
            rows = tuple(r for r in c.rows if r[col] == value)
            if len(rows) != len(c.rows):
                copies[i] = AtomCopy(c.variables, rows)
                changed[i] = True
        holder_set = set(holders)
        for v in reversed(order):
            p = parent[v]
            if p is not None and v in holder_set and changed[v]:
                new = semijoin(copies[p], copies[v])
                if new is not copies[p]:
                    copies[p] = new
                    changed[p] = True
        for v in order:
            if not changed[v]:
                continue
            for c in children[v]:
                new = semijoin(copies[c], copies[v])
                if new is not copies[c]:
                    copies[c] = new
                    changed[c] = True
        return tuple(copies)

    def _extend(self, prefix: Prefix, state) -> tuple[Prefix, tuple]:
        while len(prefix) < self.arity:
            var = self.query.head[len(prefix)]
            values = self.admissible(state, var)
            if len(values) != 1:
                break
            prefix = prefix + (values[0],)
        return prefix, state

    def root(self) -> Prefix:
        if self._root is None:
            if self.reduced.empty:
                raise EmptyAnswerError("the query has no answers on this database")
            prefix, state = self._extend((), self.reduced.copies)
            self._states[prefix] = state
            self._root = prefix
        return self._root

    def _children(self, ball: Prefix) -> Iterator[Prefix]:
        state = self._states[ball]
        var = self.query.head[len(ball)]
        for value in self.admissible(state, var):
            child, cstate = self._extend(ball + (value,), self.bind(state, var, value))
            self._states.setdefault(child, cstate)
            yield child

    def _member(self, ball: Prefix) -> Prefix:
        state = self._states[ball]
        prefix = ball
        while len(prefix) < self.arity:
            var = self.query.head[len(prefix)]
            value = self.admissible(state, var)[0]
            state = self.bind(state, var, value)
            prefix = prefix + (value,)
        return prefix


def acq_prefix_tree(q: ConjunctiveQuery, db: Database) -> PrefixTreeHandle:
    return PrefixTreeHandle(q, db)


def layered_preconditions(q: ConjunctiveQuery) -> str | None:
    """Why the layered engine cannot serve ``q``, or ``None`` if it can."""
    if not isinstance(build_join_tree(q), JoinTree):
        return "query is not acyclic"
    if not is_free_connex(q):
        return "query is not free-connex"
    trio = find_disruptive_trio(q)
    if trio is not None:
        return f"head positions {trio} form a disruptive trio"
    if len(set(q.head)) != len(q.head):
        return "head repeats a variable"
    return None


class LayeredPrefixTreeHandle(_AnswerTree):
    """Prefix balls served from per-position lookup tables.

    Layer ``i`` relates head position ``i`` to its earlier neighbours
    ``W_i``; its table maps values of ``W_i`` to the sorted admissible
    values of position ``i``.  The tables are projections of the reduced
    atoms onto head variables, which is where free-connexity and the
    absence of disruptive trios are needed.
    """

    def __init__(self, q: ConjunctiveQuery, db: Database):
        super().__init__(q, db)
        reason = layered_preconditions(q)
        if reason is not None:
            raise PreconditionError(f"layered engine unavailable: {reason}")
        reduced = yannakakis_reduce(q, db)
        self.empty = reduced.empty
        head = q.head
        pos = {v: i for i, v in enumerate(head)}
        # projections of reduced atoms onto their head variables, columns in head order
        projections: list[tuple[tuple[int, ...], set]] = []
        for copy in reduced.copies:
            cols = sorted((pos[v], copy.column(v)) for v in copy.variables if v in pos)
            if cols:
                positions = tuple(p for p, _ in cols)
                rows = {tuple(r[c] for _, c in cols) for r in copy.rows}
                projections.append((positions, rows))
        nb = neighbors(q)
        self.layers: list[tuple[tuple[int, ...], dict[tuple, tuple[int, ...]]]] = []
        for i, x in enumerate(head):
            earlier = tuple(j for j in range(i) if head[j] in nb[x])
            needed = set(earlier) | {i}
            source = next((pp for pp in projections if needed <= set(pp[0])), None)
            if source is None:
                raise InvariantError(f"no atom covers head position {i + 1} with its earlier neighbours")
            positions, rows = source
            wcols = [positions.index(j) for j in earlier]
            xcol = positions.index(i)
            table: dict[tuple, set] = {}
            for r in rows:
                table.setdefault(tuple(r[c] for c in wcols), set()).add(r[xcol])
            self.layers.append((earlier, {key: tuple(sorted(vals)) for key, vals in table.items()}))
            prefix_edges = [frozenset(q.atoms[a].varset & set(head)) for a in range(len(q.atoms))]
            if not isinstance(gyo(prefix_edges + [frozenset(head[: i + 1])]), JoinTree):
                raise InvariantError(f"head prefix of length {i + 1} is not free-connex")

    def admissible(self, prefix: Prefix) -> tuple[int, ...]:
        earlier, table = self.layers[len(prefix)]
        values = table.get(tuple(prefix[j] for j in earlier))
        if not values:
            raise InvariantError(f"prefix {prefix} has no admissible extension")
        return values

    def _extend(self, prefix: Prefix) -> Prefix:
        while len(prefix) < self.arity:
            values = self.admissible(prefix)
            if len(values) != 1:
                break
            prefix = prefix + values
        return prefix

    def root(self) -> Prefix:
        if self.empty:
            raise EmptyAnswerError("the query has no answers on this database")
        return self._extend(())

    def _children(self, ball: Prefix) -> Iterator[Prefix]:
        for value in self.admissible(ball):
            yield self._extend(ball + (value,))

    def _member(self, ball: Prefix) -> Prefix:
        prefix = ball
        while len(prefix) < self.arity:
            prefix = prefix + (self.admissible(prefix)[0],)
        return prefix


def layered_prefix_tree(q: ConjunctiveQuery, db: Database) -> LayeredPrefixTreeHandle:
    return LayeredPrefixTreeHandle(q, db)


def weitzman_fast_acq(
    q: ConjunctiveQuery, db: Database, k: int, handle: LayeredPrefixTreeHandle | None = None
) -> Selection:
    """Greedy Weitzman selection with the frontier kept in buckets by prefix length.

    The gain of the current child of a frontier ball with prefix ``p`` is
    ``2^-(|p|+1)``, so the best ball sits in the non-empty bucket of
    smallest prefix length; buckets are FIFO, matching the greedy tie rule.
    """
    h = handle if handle is not None else LayeredPrefixTreeHandle(q, db)
    if k < 2:
        raise PreconditionError(f"k must be at least 2, got {k}")
    stats = {"delta_evaluations": 0, "bucket_scans": 0, "max_frontier": 0}
    members: dict = {}

    def member(ball):
        if ball not in members:
            members[ball] = h.member(ball)
        return members[ball]

    root = h.root()
    S = [member(root)]
    value = Fraction(0)
    buckets: list[deque] = [deque() for _ in range(max(h.arity, 1))]
    size = 0

    def push(ball):
        nonlocal size
        it = h.children(ball)
        it.init()
        it.next()
        buckets[len(ball)].append((ball, it))
        size += 1

    if not h.is_singleton(root):
        push(root)
    while len(S) < k and size:
        stats["max_frontier"] = max(stats["max_frontier"], size)
        p = 0
        while not buckets[p]:
            p += 1
            stats["bucket_scans"] += 1
        ball, it = buckets[p][0]
        S.append(member(it.current))
        value += Fraction(1, 2 ** (p + 1))
        if not it.next():
            buckets[p].popleft()
            size -= 1
            for child in it.seen:
                if not h.is_singleton(child):
                    push(child)
    if len(S) < k:
        raise PreconditionError(f"the query has only {len(S)} answers, fewer than k = {k}")
    stats["balls_touched"] = len(members)
    return Selection(tuple(S), value, stats)
