"""Conjunctive queries: storage, parsing, join trees and evaluation."""

from .database import Database, Relation
from .jointree import (
    JoinTree,
    NotAcyclic,
    build_join_tree,
    find_disruptive_trio,
    gyo,
    is_acyclic,
    is_disruptive_trio,
    is_free_connex,
    neighbors,
    running_intersection,
)
from .query import Atom, ConjunctiveQuery, load_cq, parse_cq
from .yannakakis import (
    AtomCopy,
    ReducedInstance,
    atom_copies,
    evaluate_acq,
    evaluate_ids,
    full_reduce,
    naive_join,
    semijoin,
    yannakakis_reduce,
)

__all__ = [
    "Atom",
    "AtomCopy",
    "ConjunctiveQuery",
    "Database",
    "JoinTree",
    "NotAcyclic",
    "ReducedInstance",
    "Relation",
    "atom_copies",
    "build_join_tree",
    "evaluate_acq",
    "evaluate_ids",
    "find_disruptive_trio",
    "full_reduce",
    "gyo",
    "is_acyclic",
    "is_disruptive_trio",
    "is_free_connex",
    "load_cq",
    "naive_join",
    "neighbors",
    "parse_cq",
    "running_intersection",
    "semijoin",
    "yannakakis_reduce",
]
