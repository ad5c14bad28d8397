"""Join trees by GYO reduction, free-connexity and disruptive trios."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .query import ConjunctiveQuery


@dataclass(frozen=True)
class JoinTree:
    """Tree over atom indices; ``parent[root]`` is ``None``."""

    parent: tuple[int | None, ...]
    root: int

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(v, p) for v, p in enumerate(self.parent) if p is not None]

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.parent]
        for v, p in self.edges:
            adj[v].append(p)
            adj[p].append(v)
        for row in adj:
            row.sort()
        return adj

    def rooted(self, root: int) -> tuple[list[int | None], list[list[int]], list[int]]:
        """Re-orient at ``root``: (parent, children, preorder)."""
        adj = self.adjacency()
        parent: list[int | None] = [None] * len(adj)
        children: list[list[int]] = [[] for _ in adj]
        order = []
        seen = [False] * len(adj)
        stack = [root]
        seen[root] = True
        while stack:
            v = stack.pop()
            order.append(v)
            for w in reversed(adj[v]):
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    children[v].insert(0, w)
                    stack.append(w)
        return parent, children, order


@dataclass(frozen=True)
class NotAcyclic:
    """GYO got stuck; ``residue`` lists the atom indices that could not be removed."""

    residue: tuple[int, ...]

    def __bool__(self) -> bool:
        return False


def gyo(edges: Sequence[frozenset]) -> JoinTree | NotAcyclic:
    """Repeatedly remove the lowest-index ear, attaching it to the lowest-index witness."""
    if not edges:
        return NotAcyclic(())
    remaining = list(range(len(edges)))
    parent: list[int | None] = [None] * len(edges)
    while len(remaining) > 1:
        for e in remaining:
            others = [f for f in remaining if f != e]
            shared = edges[e] & frozenset().union(*(edges[f] for f in others))
            witness = next((f for f in others if shared <= edges[f]), None)
            if witness is not None:
                parent[e] = witness
                remaining.remove(e)
                break
        else:
            return NotAcyclic(tuple(remaining))
    return JoinTree(tuple(parent), remaining[0])


def build_join_tree(q: ConjunctiveQuery) -> JoinTree | NotAcyclic:
    return gyo([atom.varset for atom in q.atoms])


def is_acyclic(q: ConjunctiveQuery) -> bool:
    return isinstance(build_join_tree(q), JoinTree)


def running_intersection(q: ConjunctiveQuery, tree: JoinTree) -> bool:
    """Every variable's atoms induce a connected subtree (checked by counting edges)."""
    if len(tree.parent) != len(q.atoms) or len(tree.edges) != len(q.atoms) - 1:
        return False
    _, _, order = tree.rooted(tree.root)
    if sorted(order) != list(range(len(q.atoms))):
        return False
    for v in q.variables:
        holders = {i for i, atom in enumerate(q.atoms) if v in atom.varset}
        inner = sum(1 for a, b in tree.edges if a in holders and b in holders)
        if inner != len(holders) - 1:
            return False
    return True


def is_free_connex(q: ConjunctiveQuery) -> bool:
    """Acyclic, and still acyclic after adding one atom over the head variables."""
    edges = [atom.varset for atom in q.atoms]
    return isinstance(gyo(edges), JoinTree) and isinstance(gyo(edges + [frozenset(q.head)]), JoinTree)


def neighbors(q: ConjunctiveQuery) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {v: set() for v in q.variables}
    for atom in q.atoms:
        for a, b in combinations(atom.distinct_variables(), 2):
            out[a].add(b)
            out[b].add(a)
    return out


def is_disruptive_trio(q: ConjunctiveQuery, i: int, j: int, k: int) -> bool:
    """1-based head positions; ``i, j < k``, head[i] and head[j] apart, head[k] adjacent to both."""
    if not (i < k and j < k and i != j):
        return False
    nb = neighbors(q)
    xi, xj, xk = q.head[i - 1], q.head[j - 1], q.head[k - 1]
    if xi == xj or xj in nb[xi]:
        return False
    return xk in nb[xi] and xk in nb[xj]


def find_disruptive_trio(q: ConjunctiveQuery) -> tuple[int, int, int] | None:
    n = len(q.head)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for k in range(j + 1, n + 1):
                if is_disruptive_trio(q, i, j, k):
                    return (i, j, k)
    return None
