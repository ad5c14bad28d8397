"""Semijoin reduction and evaluation of acyclic conjunctive queries."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Iterator, Sequence

from ..errors import CapExceededError, PreconditionError
from .database import Database
from .jointree import JoinTree, build_join_tree
from .query import ConjunctiveQuery

Row = tuple[int, ...]


@dataclass(frozen=True)
class AtomCopy:
    """An atom's private relation over its distinct variables."""

    variables: tuple[str, ...]
    rows: tuple[Row, ...]

    def column(self, var: str) -> int:
        return self.variables.index(var)


def atom_copies(q: ConjunctiveQuery, db: Database) -> list[AtomCopy]:
    """Per-atom copies with repeated-variable equalities applied and duplicate columns dropped."""
    copies = []
    for atom in q.atoms:
        rel = db.relation(atom.relation)
        if rel.arity is not None and rel.arity != len(atom.variables):
            raise PreconditionError(
                f"atom {atom} has arity {len(atom.variables)} but relation {atom.relation} has arity {rel.arity}"
            )
        distinct = atom.distinct_variables()
        first = [atom.variables.index(v) for v in distinct]
        checks = [(pos, atom.variables.index(v)) for pos, v in enumerate(atom.variables) if atom.variables.index(v) != pos]
        rows = sorted({tuple(row[p] for p in first) for row in rel.rows if all(row[a] == row[b] for a, b in checks)})
        copies.append(AtomCopy(distinct, tuple(rows)))
    return copies


def _key(copy: AtomCopy, on: Sequence[str]):
    cols = [copy.column(v) for v in on]
    return lambda row: tuple(row[c] for c in cols)


def semijoin(left: AtomCopy, right: AtomCopy) -> AtomCopy:
    """Rows of ``left`` with a join partner in ``right``, by sorting both sides and merging."""
    shared = [v for v in left.variables if v in right.variables]
    if not shared:
        return left if right.rows else AtomCopy(left.variables, ())
    lkey, rkey = _key(left, shared), _key(right, shared)
    lrows = sorted(left.rows, key=lkey)
    rkeys = [k for k, _ in groupby(sorted(map(rkey, right.rows)))]
    kept = []
    j = 0
    for row in lrows:
        k = lkey(row)
        while j < len(rkeys) and rkeys[j] < k:
            j += 1
        if j < len(rkeys) and rkeys[j] == k:
            kept.append(row)
    if len(kept) == len(left.rows):
        return left
    return AtomCopy(left.variables, tuple(sorted(kept)))


def full_reduce(copies: list[AtomCopy], tree: JoinTree, root: int | None = None) -> list[AtomCopy]:
    """Bottom-up then top-down semijoin passes; afterwards every row extends to an answer."""
    root = tree.root if root is None else root
    parent, children, order = tree.rooted(root)
    copies = list(copies)
    for v in reversed(order):
        p = parent[v]
        if p is not None:
            copies[p] = semijoin(copies[p], copies[v])
    for v in order:
        for c in children[v]:
            copies[c] = semijoin(copies[c], copies[v])
    return copies


@dataclass(frozen=True)
class ReducedInstance:
    query: ConjunctiveQuery
    tree: JoinTree
    copies: tuple[AtomCopy, ...]

    @property
    def empty(self) -> bool:
        return any(not c.rows for c in self.copies)


def yannakakis_reduce(q: ConjunctiveQuery, db: Database, tree: JoinTree | None = None) -> ReducedInstance:
    if tree is None:
        tree = build_join_tree(q)
        if not isinstance(tree, JoinTree):
            raise PreconditionError(f"query is not acyclic (GYO residue atoms {list(tree.residue)})")
    copies = full_reduce(atom_copies(q, db), tree)
    if any(not c.rows for c in copies):
        copies = [AtomCopy(c.variables, ()) for c in copies]
    return ReducedInstance(q, tree, tuple(copies))


def homomorphisms(reduced: ReducedInstance) -> Iterator[dict[str, int]]:
    """Backtracking over atoms in join-tree preorder; each level looks up rows by its parent's bindings."""
    if reduced.empty:
        return
    tree = reduced.tree
    parent, _, order = tree.rooted(tree.root)
    plans = []
    for v in order:
        copy = reduced.copies[v]
        p = parent[v]
        shared = [x for x in copy.variables if p is not None and x in reduced.copies[p].variables]
        key = _key(copy, shared)
        index: dict[tuple, list[Row]] = {}
        for row in copy.rows:
            index.setdefault(key(row), []).append(row)
        plans.append((shared, copy.variables, index))
    binding: dict[str, int] = {}

    def walk(level: int) -> Iterator[dict[str, int]]:
        if level == len(plans):
            yield binding
            return
        shared, variables, index = plans[level]
        for row in index.get(tuple(binding[x] for x in shared), ()):
            if any(binding.get(x, val) != val for x, val in zip(variables, row)):
                continue
            added = [x for x in variables if x not in binding]
            for x, val in zip(variables, row):
                binding[x] = val
            yield from walk(level + 1)
            for x in added:
                del binding[x]

    yield from walk(0)


def evaluate_ids(q: ConjunctiveQuery, db: Database, cap: int | None = None) -> set[Row]:
    reduced = yannakakis_reduce(q, db)
    answers: set[Row] = set()
    for h in homomorphisms(reduced):
        answers.add(tuple(h[x] for x in q.head))
        if cap is not None and len(answers) > cap:
            raise CapExceededError(f"answer set exceeds the cap of {cap} tuples")
    return answers


def evaluate_acq(q: ConjunctiveQuery, db: Database, cap: int | None = None) -> set[tuple[str, ...]]:
    """All answers of an acyclic query, as tuples of strings."""
    return {db.decode(row) for row in evaluate_ids(q, db, cap)}


def naive_join(q: ConjunctiveQuery, db: Database) -> set[tuple[str, ...]]:
    """Nested-loop join over the raw relations with projection and deduplication."""
    answers = set()

    def extend(i: int, binding: dict):
        if i == len(q.atoms):
            answers.add(tuple(db.strings[binding[x]] for x in q.head))
            return
        atom = q.atoms[i]
        for row in db.relation(atom.relation).rows:
            if len(row) != len(atom.variables):
                raise PreconditionError(f"arity mismatch for atom {atom}")
            new = dict(binding)
            ok = True
            for x, val in zip(atom.variables, row):
                if new.setdefault(x, val) != val:
                    ok = False
                    break
            if ok:
                extend(i + 1, new)

    extend(0, {})
    return answers
