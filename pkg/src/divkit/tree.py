"""Explicit ultrametric trees: construction, validation and a text format."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import FormatError, PreconditionError
from .numeric import DistanceMatrix, MetricFn, format_rational, parse_rational


@dataclass(frozen=True)
class UltrametricTree:
    """Ball hierarchy over element ids ``0..n-1``.

    Node 0 is the root.  ``order`` lists element ids in DFS leaf order and
    ``span[v] = (lo, hi)`` makes node ``v``'s elements ``order[lo:hi]``.
    """

    items: tuple
    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    radius: tuple[Fraction, ...]
    leaf: tuple[int, ...]
    order: tuple[int, ...] = field(init=False)
    span: tuple[tuple[int, int], ...] = field(init=False)
    leaf_of: tuple[int, ...] = field(init=False)
    depth: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        m = len(self.parent)
        order: list[int] = []
        span = [(0, 0)] * m
        depth = [0] * m
        # iterative DFS; a node's span closes after all its descendants
        stack: list[tuple[int, bool]] = [(0, False)]
        start = [0] * m
        while stack:
            v, done = stack.pop()
            if done:
                span[v] = (start[v], len(order))
                continue
            start[v] = len(order)
            stack.append((v, True))
            if self.leaf[v] >= 0:
                order.append(self.leaf[v])
            for c in reversed(self.children[v]):
                depth[c] = depth[v] + 1
                stack.append((c, False))
        leaf_of = [-1] * len(order)
        for v, e in enumerate(self.leaf):
            if e >= 0:
                leaf_of[e] = v
        object.__setattr__(self, "order", tuple(order))
        object.__setattr__(self, "span", tuple(span))
        object.__setattr__(self, "leaf_of", tuple(leaf_of))
        object.__setattr__(self, "depth", tuple(depth))

    root = 0

    @property
    def n_elements(self) -> int:
        return len(self.order)

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    def is_leaf(self, v: int) -> bool:
        return self.leaf[v] >= 0

    def size(self, v: int) -> int:
        lo, hi = self.span[v]
        return hi - lo

    def elements(self, v: int) -> tuple[int, ...]:
        lo, hi = self.span[v]
        return self.order[lo:hi]

    def min_element(self, v: int) -> int:
        lo, hi = self.span[v]
        return min(self.order[lo:hi])

    def lca(self, a: int, b: int) -> int:
        u, v = self.leaf_of[a], self.leaf_of[b]
        while self.depth[u] > self.depth[v]:
            u = self.parent[u]
        while self.depth[v] > self.depth[u]:
            v = self.parent[v]
        while u != v:
            u, v = self.parent[u], self.parent[v]
        return u

    def distance(self, a: int, b: int) -> Fraction:
        """Radius of the least common ancestor of the leaves of elements ``a`` and ``b``."""
        return self.radius[self.lca(a, b)]

    def balls(self) -> list[tuple[Fraction, frozenset]]:
        """(radius, element labels) for every node, sorted; equal lists mean isomorphic trees."""
        out = [(self.radius[v], frozenset(self.items[e] for e in self.elements(v))) for v in range(self.n_nodes)]
        return sorted(out, key=lambda rb: (rb[0], sorted(map(repr, rb[1]))))


def _canonical(records, root, items) -> UltrametricTree:
    """Number nodes in preorder with children sorted by minimum element id."""
    min_leaf: dict[int, int] = {}
    # post-order to compute minimum element ids
    stack = [(root, False)]
    while stack:
        r, done = stack.pop()
        members, radius, kids, leaf = records[r]
        if done:
            min_leaf[r] = leaf if leaf >= 0 else min(min_leaf[c] for c in kids)
            continue
        stack.append((r, True))
        stack.extend((c, False) for c in kids)
    parent: list[int] = []
    children: list[list[int]] = []
    radius: list[Fraction] = []
    leaf: list[int] = []
    stack2: list[tuple[int, int]] = [(root, -1)]
    while stack2:
        r, p = stack2.pop()
        v = len(parent)
        parent.append(p)
        children.append([])
        radius.append(records[r][1])
        leaf.append(records[r][3])
        if p >= 0:
            children[p].append(v)
        kids = sorted(records[r][2], key=min_leaf.__getitem__)
        stack2.extend((c, v) for c in reversed(kids))
    return UltrametricTree(tuple(items), tuple(parent), tuple(map(tuple, children)), tuple(radius), tuple(leaf))


def prim_mst(w: Sequence[Sequence]) -> list[tuple[object, int, int]]:
    """Dense Prim over a complete graph; returns edges ``(weight, i, j)`` with ``i < j``.

    Ties prefer the candidate edge with the smaller ``(weight, min id, max id)``.
    """
    n = len(w)
    if n <= 1:
        return []
    in_tree = [False] * n
    best: list[tuple | None] = [None] * n
    in_tree[0] = True
    for x in range(1, n):
        best[x] = (w[0][x], 0, x)
    edges = []
    for _ in range(n - 1):
        v, key = -1, None
        for x in range(n):
            if not in_tree[x] and (key is None or best[x] < key):
                v, key = x, best[x]
        in_tree[v] = True
        edges.append(key)
        for x in range(n):
            if not in_tree[x]:
                cand = (w[v][x], min(v, x), max(v, x))
                if cand < best[x]:
                    best[x] = cand
    return edges


def build_ultrametric_tree(S: Iterable, u: MetricFn | DistanceMatrix) -> UltrametricTree:
    """Build the ball hierarchy of an ultrametric ``u`` over ``S`` in O(|S|^2).

    When ``u`` is a :class:`DistanceMatrix` its ids are used directly and
    ``S`` is ignored.
    """
    if isinstance(u, DistanceMatrix):
        dm = u
    else:
        dm = DistanceMatrix.from_oracle(S, u)
    n = len(dm)
    if n == 0:
        raise PreconditionError("cannot build an ultrametric tree over an empty set")
    w = dm.ints
    # ball records: (members, radius, child record ids, leaf element or -1)
    records: list[tuple[list[int], Fraction, list[int], int]] = [([e], Fraction(0), [], e) for e in range(n)]
    current = list(range(n))
    mst = sorted(prim_mst(w))
    for weight, a, b in mst:
        radius = Fraction(weight, dm.scale)
        ra, rb = current[a], current[b]
        kids: list[int] = []
        for r in (ra, rb):
            if records[r][1] < radius:
                kids.append(r)
            else:
                kids.extend(records[r][2])
        members = records[ra][0] + records[rb][0]
        new = len(records)
        records.append((members, radius, kids, -1))
        for e in members:
            current[e] = new
    return _canonical(records, current[0], dm.items)


@dataclass
class TreeCheck:
    ok: bool
    diagnostics: list[str]
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_tree(t: UltrametricTree, u: MetricFn) -> TreeCheck:
    """Check laminarity, exact cross-child distances, and LCA reproduction of ``u``."""
    problems: list[str] = []
    witness = None

    def fail(msg, pair=None):
        nonlocal witness
        problems.append(msg)
        if witness is None and pair is not None:
            witness = pair

    n = len(t.items)
    leaves = sorted(e for e in t.leaf if e >= 0)
    if leaves != list(range(n)):
        fail("leaf set differs from the element set")
        return TreeCheck(False, problems)
    sets = [frozenset(t.elements(v)) for v in range(t.n_nodes)]
    for v in range(t.n_nodes):
        if t.is_leaf(v):
            if t.radius[v] != 0 or t.children[v]:
                fail(f"leaf node {v} must have radius 0 and no children")
        elif len(t.children[v]) < 2:
            fail(f"internal node {v} has fewer than two children")
        if t.parent[v] >= 0 and not t.radius[v] < t.radius[t.parent[v]]:
            fail(f"radius does not decrease from node {t.parent[v]} to node {v}")
    for v in range(t.n_nodes):
        for x in range(v + 1, t.n_nodes):
            inter = sets[v] & sets[x]
            if inter and inter != sets[v] and inter != sets[x]:
                fail(f"balls {v} and {x} overlap without nesting")
    for v in range(t.n_nodes):
        kids = t.children[v]
        if not kids:
            continue
        if frozenset().union(*(sets[c] for c in kids)) != sets[v] or sum(len(sets[c]) for c in kids) != len(sets[v]):
            fail(f"children of node {v} do not partition it")
        for i, c1 in enumerate(kids):
            for c2 in kids[i + 1 :]:
                for a in sets[c1]:
                    for b in sets[c2]:
                        d = Fraction(u(t.items[a], t.items[b]))
                        if d != t.radius[v]:
                            fail(f"pair ({a}, {b}) across children of node {v}: distance {d} != radius {t.radius[v]}", (a, b))
    for a in range(n):
        for b in range(a + 1, n):
            d = Fraction(u(t.items[a], t.items[b]))
            if t.distance(a, b) != d:
                fail(f"LCA radius {t.distance(a, b)} != distance {d} for pair ({a}, {b})", (a, b))
    return TreeCheck(not problems, problems, witness)


def dump_tree(t: UltrametricTree) -> str:
    """One line per node: ``id parent num/den leaf`` with ``-`` for absent fields."""
    lines = []
    for v in range(t.n_nodes):
        parent = "-" if t.parent[v] < 0 else str(t.parent[v])
        leaf = str(t.leaf[v]) if t.leaf[v] >= 0 else "-"
        lines.append(f"{v} {parent} {format_rational(t.radius[v])} {leaf}")
    return "\n".join(lines) + "\n"


def load_tree(text: str, items: Sequence | None = None) -> UltrametricTree:
    parent: list[int] = []
    radius: list[Fraction] = []
    leaf: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 4:
            raise FormatError(f"line {lineno}: expected 4 fields")
        vid, par, rad, lf = fields
        try:
            if int(vid) != len(parent):
                raise FormatError(f"line {lineno}: node ids must be consecutive from 0")
            p = -1 if par == "-" else int(par)
            e = -1 if lf == "-" else int(lf)
        except ValueError as exc:
            raise FormatError(f"line {lineno}: malformed integer") from exc
        if (p < 0) != (len(parent) == 0) or p >= len(parent):
            raise FormatError(f"line {lineno}: parent must precede its child and only node 0 is the root")
        parent.append(p)
        radius.append(parse_rational(rad))
        leaf.append(e)
    if not parent:
        raise FormatError("empty tree")
    children: list[list[int]] = [[] for _ in parent]
    for v, p in enumerate(parent):
        if p >= 0:
            children[p].append(v)
    n = sum(1 for e in leaf if e >= 0)
    if sorted(e for e in leaf if e >= 0) != list(range(n)):
        raise FormatError("leaf elements must be exactly 0..n-1")
    if items is None:
        items = tuple(range(n))
    return UltrametricTree(tuple(items), tuple(parent), tuple(map(tuple, children)), tuple(radius), tuple(leaf))
