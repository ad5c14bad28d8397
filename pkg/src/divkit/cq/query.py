"""Conjunctive queries in a datalog-like syntax: ``Q(x, y) :- R(x, z), S(z, y).``"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ..errors import FormatError


@dataclass(frozen=True)
class Atom:
    relation: str
    variables: tuple[str, ...]

    @property
    def varset(self) -> frozenset[str]:
        return frozenset(self.variables)

    def distinct_variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.variables))

    def __str__(self) -> str:
        return f"{self.relation}({','.join(self.variables)})"


@dataclass(frozen=True)
class ConjunctiveQuery:
    name: str
    head: tuple[str, ...]
    atoms: tuple[Atom, ...]

    @property
    def variables(self) -> tuple[str, ...]:
        """All variables in order of first occurrence in the body."""
        return tuple(dict.fromkeys(v for atom in self.atoms for v in atom.variables))

    def __str__(self) -> str:
        body = ", ".join(map(str, self.atoms))
        return f"{self.name}({','.join(self.head)}) :- {body}."


_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<arrow>:-|<-)|(?P<punct>[(),.]))")


def _tokens(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise FormatError(f"unexpected character {text[pos + stripped]!r}", pos + stripped)
        kind = m.lastgroup
        yield kind, m.group(kind), m.start(kind)
        pos = m.end()
    yield "end", "", len(text)


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, value: str | None = None):
        tk, tv, tp = self.toks[self.i]
        if tk != kind or (value is not None and tv != value):
            want = value or kind
            raise FormatError(f"expected {want!r}, found {tv or 'end of input'!r}", tp)
        self.i += 1
        return tv, tp

    def arguments(self) -> tuple[str, ...]:
        self.take("punct", "(")
        args = []
        if self.peek()[:2] != ("punct", ")"):
            args.append(self.take("ident")[0])
            while self.peek()[:2] == ("punct", ","):
                self.i += 1
                args.append(self.take("ident")[0])
        self.take("punct", ")")
        return tuple(args)

    def parse(self) -> ConjunctiveQuery:
        name, _ = self.take("ident")
        head = self.arguments()
        self.take("arrow")
        atoms = []
        kind, value, pos = self.peek()
        if kind != "ident":
            raise FormatError("query body must contain at least one atom", pos)
        while True:
            rel, _ = self.take("ident")
            atoms.append(Atom(rel, self.arguments()))
            if self.peek()[:2] == ("punct", ","):
                self.i += 1
                continue
            break
        if self.peek()[:2] == ("punct", "."):
            self.i += 1
        kind, value, pos = self.peek()
        if kind != "end":
            raise FormatError(f"unexpected {value!r} after the query", pos)
        return ConjunctiveQuery(name, head, tuple(atoms))


def parse_cq(text: str) -> ConjunctiveQuery:
    """Parse one rule; head variables must occur in the body and arities must be consistent."""
    q = _Parser(text).parse()
    body_vars = set(q.variables)
    for v in q.head:
        if v not in body_vars:
            raise FormatError(f"head variable {v!r} does not occur in the body", text.find(v))
    arity: dict[str, int] = {}
    for atom in q.atoms:
        if arity.setdefault(atom.relation, len(atom.variables)) != len(atom.variables):
            raise FormatError(f"relation {atom.relation!r} used with arities {arity[atom.relation]} and {len(atom.variables)}")
    return q


def load_cq(path: str | Path) -> ConjunctiveQuery:
    return parse_cq(Path(path).read_text(encoding="utf-8"))
