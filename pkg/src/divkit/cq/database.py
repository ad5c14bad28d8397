"""In-memory relational store with string values interned to integers."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..errors import FormatError, PreconditionError


@dataclass(frozen=True)
class Relation:
    arity: int | None  # None for an empty relation loaded from an empty file
    rows: tuple[tuple[int, ...], ...]


class Database:
    """Relations over interned values.

    Value ids follow the lexicographic order of the original strings, so
    sorting ids sorts values.  Rows are deduplicated (set semantics).
    """

    def __init__(self, relations: Mapping[str, Iterable[Sequence]], arities: Mapping[str, int] | None = None):
        raw = {name: [tuple(str(v) for v in row) for row in rows] for name, rows in relations.items()}
        values = sorted({v for rows in raw.values() for row in rows for v in row})
        self.strings: tuple[str, ...] = tuple(values)
        self.codes: dict[str, int] = {s: i for i, s in enumerate(values)}
        self.relations: dict[str, Relation] = {}
        arities = dict(arities or {})
        for name, rows in raw.items():
            arity = arities.get(name)
            for row in rows:
                if arity is None:
                    arity = len(row)
                elif len(row) != arity:
                    raise FormatError(f"relation {name}: rows of arity {arity} and {len(row)}")
            encoded = sorted({tuple(self.codes[v] for v in row) for row in rows})
            self.relations[name] = Relation(arity, tuple(encoded))

    @classmethod
    def load_dir(cls, path: str | Path) -> "Database":
        """One headerless ``<Relation>.csv`` file per relation."""
        path = Path(path)
        if not path.is_dir():
            raise PreconditionError(f"database directory not found: {path}")
        relations = {}
        for file in sorted(path.glob("*.csv")):
            with file.open(newline="", encoding="utf-8") as fh:
                relations[file.stem] = [tuple(cell.strip() for cell in row) for row in csv.reader(fh) if row]
        return cls(relations)

    def arity(self, name: str) -> int | None:
        return self.relation(name).arity

    def relation(self, name: str) -> Relation:
        try:
            return self.relations[name]
        except KeyError:
            raise PreconditionError(f"unknown relation {name!r}") from None

    def decode(self, row: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.strings[v] for v in row)

    def size(self) -> int:
        return sum(len(r.rows) for r in self.relations.values())
