"""Seeded random instances: ultrametrics with known trees and acyclic query workloads."""

from __future__ import annotations

import random
from fractions import Fraction

from .cq.database import Database
from .cq.query import Atom, ConjunctiveQuery
from .numeric import TableMetric


def random_ultrametric(
    rng: random.Random, n: int, max_children: int = 4, top: Fraction = Fraction(1)
) -> tuple[list[str], TableMetric, list[tuple[Fraction, frozenset]]]:
    """Random ultrametric over ``n`` labels from a random tree with strictly decreasing radii.

    Returns the labels, the metric (certified ultrametric) and the generating
    balls as ``(radius, labels)`` pairs, which is the ground truth for tree
    construction.
    """
    labels = [f"e{i}" for i in range(n)]
    shuffled = labels[:]
    rng.shuffle(shuffled)
    table: dict[tuple, Fraction] = {}
    balls: list[tuple[Fraction, frozenset]] = []
    stack = [(shuffled, top)]
    while stack:
        group, upper = stack.pop()
        if len(group) == 1:
            balls.append((Fraction(0), frozenset(group)))
            continue
        radius = upper * Fraction(rng.randint(1, 3), 4)
        parts = rng.randint(2, min(max_children, len(group)))
        cuts = sorted(rng.sample(range(1, len(group)), parts - 1))
        pieces = [group[a:b] for a, b in zip([0] + cuts, cuts + [len(group)])]
        for i, x in enumerate(pieces):
            for y in pieces[i + 1 :]:
                for a in x:
                    for b in y:
                        table[a, b] = radius
        balls.append((radius, frozenset(group)))
        stack.extend((piece, radius) for piece in pieces)
    return labels, TableMetric(labels, table, ultrametric=True), balls


def random_acyclic_query(
    rng: random.Random, max_atoms: int = 5, max_arity: int = 3, repeat_prob: float = 0.1, self_join_prob: float = 0.2
) -> ConjunctiveQuery:
    """Acyclic by construction: each new atom shares variables with a single earlier atom."""
    n_atoms = rng.randint(1, max_atoms)
    fresh = iter(f"v{i}" for i in range(1000))
    atom_vars: list[list[str]] = []
    for i in range(n_atoms):
        if i == 0:
            shared: list[str] = []
        else:
            parent = atom_vars[rng.randrange(i)]
            distinct = list(dict.fromkeys(parent))
            shared = rng.sample(distinct, rng.randint(0, len(distinct)))
        arity = rng.randint(max(1, len(shared)), max(max_arity, len(shared)))
        own = shared + [next(fresh) for _ in range(arity - len(shared))]
        rng.shuffle(own)
        if own and rng.random() < repeat_prob:
            own.append(rng.choice(own))
        atom_vars.append(own)
    rng.shuffle(atom_vars)
    atoms = []
    names_by_arity: dict[int, list[str]] = {}
    for i, vs in enumerate(atom_vars):
        same = names_by_arity.get(len(vs), [])
        if same and rng.random() < self_join_prob:
            name = rng.choice(same)
        else:
            name = f"R{i}"
            names_by_arity.setdefault(len(vs), []).append(name)
        atoms.append(Atom(name, tuple(vs)))
    variables = list(dict.fromkeys(v for a in atoms for v in a.variables))
    head = rng.sample(variables, rng.randint(1, len(variables)))
    return ConjunctiveQuery("Q", tuple(head), tuple(atoms))


def random_database(rng: random.Random, q: ConjunctiveQuery, max_tuples: int = 40, domain: int = 3) -> Database:
    arity = {a.relation: len(a.variables) for a in q.atoms}
    names = sorted(arity)
    budget = rng.randint(len(names), max(len(names), max_tuples))
    shares = [1] * len(names)
    for _ in range(budget - len(names)):
        shares[rng.randrange(len(names))] += 1
    relations = {}
    for name, count in zip(names, shares):
        rows = {tuple(str(rng.randrange(domain)) for _ in range(arity[name])) for _ in range(count)}
        relations[name] = sorted(rows)
    return Database(relations, arities=arity)


def random_acq_instance(rng: random.Random, **kwargs) -> tuple[ConjunctiveQuery, Database]:
    max_tuples = kwargs.pop("max_tuples", 40)
    domain = kwargs.pop("domain", 3)
    q = random_acyclic_query(rng, **kwargs)
    return q, random_database(rng, q, max_tuples=max_tuples, domain=domain)
