"""Independent-set reductions to diverse subset selection, and an exact IS oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .errors import CapExceededError, FormatError, PreconditionError
from .numeric import TableMetric

IS_CAP = 16
TUPLE_ARITY = 5


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    edges: frozenset[tuple[int, int]]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        normalized = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
            if u == v:
                raise PreconditionError(f"self-loop at vertex {u}")
            normalized.add((min(u, v), max(u, v)))
        return cls(n, frozenset(normalized))

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def max_degree(self) -> int:
        return max((self.degree(v) for v in range(self.n)), default=0)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def parse_graph(text: str) -> Graph:
    """Edge-list text: vertex count on the first line, then one ``u v`` pair per line."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise FormatError("graph file is empty")
    try:
        n = int(lines[0])
        edges = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"malformed graph file: {exc}") from exc
    if any(len(e) != 2 for e in edges):
        raise FormatError("each edge line must hold exactly two vertex ids")
    return Graph.from_edges(n, edges)


def load_graph(path: str | Path) -> Graph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def format_graph(g: Graph) -> str:
    return "\n".join([str(g.n)] + [f"{u} {v}" for u, v in g.sorted_edges()]) + "\n"


def vertex_label(v: int) -> str:
    return f"v{v + 1}"


def is_to_metric_instance(g: Graph, k: int) -> tuple[list[str], TableMetric, Fraction]:
    """Distance 1 across edges and 2 otherwise; an IS of size k exists iff the Weitzman value reaches the threshold."""
    if not 1 <= k <= g.n:
        raise PreconditionError(f"k must satisfy 1 <= k <= n = {g.n}, got {k}")
    labels = [vertex_label(v) for v in range(g.n)]
    table = {}
    for u, v in combinations(range(g.n), 2):
        table[labels[u], labels[v]] = Fraction(1 if g.adjacent(u, v) else 2)
    threshold = Fraction(g.n - k + 2 * (k - 1))
    return labels, TableMetric(labels, table), threshold


def is_to_tuple_instance(g: Graph, k: int) -> tuple[list[tuple[str, ...]], Fraction]:
    """Arity-5 tuples whose Hamming distance is 4 for adjacent and 5 for non-adjacent vertices.

    Each vertex starts as five copies of its own symbol; every edge then
    overwrites, in both endpoint tuples, the lowest coordinate still free in
    both with a symbol of its own.  Degree at most 3 guarantees such a
    coordinate exists.
    """
    if not 1 <= k <= g.n:
        raise PreconditionError(f"k must satisfy 1 <= k <= n = {g.n}, got {k}")
    if g.max_degree() > 3:
        raise PreconditionError(f"tuple reduction needs maximum degree <= 3, got {g.max_degree()}")
    tuples = [[f"a{v + 1}"] * TUPLE_ARITY for v in range(g.n)]
    free = [[True] * TUPLE_ARITY for _ in range(g.n)]
    for j, (u, v) in enumerate(g.sorted_edges(), start=1):
        slot = next(i for i in range(TUPLE_ARITY) if free[u][i] and free[v][i])
        tuples[u][slot] = tuples[v][slot] = f"b{j}"
        free[u][slot] = free[v][slot] = False
    threshold = Fraction(4 * (g.n - k) + 5 * (k - 1))
    return [tuple(t) for t in tuples], threshold


def exact_independent_set(g: Graph, k: int) -> bool:
    """Exhaustive search for an independent set of size ``k``."""
    if g.n > IS_CAP:
        raise CapExceededError(f"exact independent set search is capped at {IS_CAP} vertices, got {g.n}")
    if k <= 0:
        return True
    if k > g.n:
        return False
    adj = [0] * g.n
    for u, v in g.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u

    def search(start: int, chosen: int, blocked: int, need: int) -> bool:
        if need == 0:
            return True
        for v in range(start, g.n - need + 1):
            if not blocked >> v & 1 and search(v + 1, chosen | 1 << v, blocked | adj[v], need - 1):
                return True
        return False

    return search(0, 0, 0, k)


def random_graph(rng: random.Random, n: int, p: float) -> Graph:
    return Graph.from_edges(n, [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p])


def random_bounded_degree_graph(rng: random.Random, n: int, max_degree: int = 3, attempts: int | None = None) -> Graph:
    """Random graph built by adding shuffled candidate edges while both endpoints have spare degree."""
    pairs = list(combinations(range(n), 2))
    rng.shuffle(pairs)
    limit = len(pairs) if attempts is None else attempts
    degree = [0] * n
    edges = []
    for u, v in pairs[:limit]:
        if degree[u] < max_degree and degree[v] < max_degree and rng.random() < 0.6:
            edges.append((u, v))
            degree[u] += 1
            degree[v] += 1
    return Graph.from_edges(n, edges)
