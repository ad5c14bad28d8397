"""Exact distances, metric oracles and the metric checkers.

Distances are ``fractions.Fraction`` values throughout.  A metric oracle is
any callable ``d(a, b) -> Fraction``; the classes below are the concrete
oracles used by the rest of the package.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Callable, Hashable, Iterable, NamedTuple, Sequence

from .errors import FormatError, PreconditionError

Rational = Fraction
MetricFn = Callable[[Hashable, Hashable], Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` or an integer literal into a non-negative rational."""
    text = text.strip()
    try:
        num, sep, den = text.partition("/")
        value = Fraction(int(num), int(den)) if sep else Fraction(int(num))
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"not a rational: {text!r}") from exc
    if value < 0:
        raise FormatError(f"negative distance: {text!r}")
    return value


def format_rational(value: Fraction) -> str:
    """Render as ``num/den`` (the denominator is always written)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Fraction, digits: int = 12) -> str:
    """Fixed-point rendering for human consumption; never fed back into the core."""
    value = Fraction(value)
    scaled = round(value * 10**digits)
    whole, frac = divmod(scaled, 10**digits)
    return f"{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".")


class Fact(NamedTuple):
    """A relational tuple: relation name plus its value sequence."""

    relation: str
    values: tuple


def first_difference(xs: Sequence, ys: Sequence) -> int | None:
    """0-based index of the first position where the sequences differ.

    A position present in only one sequence counts as differing; ``None``
    means the sequences are equal.
    """
    for i, (x, y) in enumerate(zip(xs, ys)):
        if x != y:
            return i
    if len(xs) == len(ys):
        return None
    return min(len(xs), len(ys))


def urel_distance(t1: Fact | Sequence, t2: Fact | Sequence) -> Fraction:
    """Relational ultrametric: 1 across relations, else 2^-i for the first differing position i.

    Plain sequences are treated as tuples of one common relation.
    """
    if isinstance(t1, Fact) and isinstance(t2, Fact):
        if t1.relation != t2.relation:
            return ONE
        t1, t2 = t1.values, t2.values
    i = first_difference(t1, t2)
    if i is None:
        return ZERO
    return Fraction(1, 2 ** (i + 1))


def hamming_distance(t1: Sequence, t2: Sequence) -> Fraction:
    if isinstance(t1, Fact):
        t1 = t1.values
    if isinstance(t2, Fact):
        t2 = t2.values
    if len(t1) != len(t2):
        raise PreconditionError(f"arity mismatch: {len(t1)} vs {len(t2)}")
    return Fraction(sum(1 for x, y in zip(t1, t2) if x != y))


class Metric:
    """Base class for metric oracles; ``ultrametric`` certifies the strong triangle inequality."""

    ultrametric = False

    def __call__(self, a, b) -> Fraction:
        raise NotImplementedError


class UrelMetric(Metric):
    ultrametric = True

    def __call__(self, a, b) -> Fraction:
        return urel_distance(a, b)


class HammingMetric(Metric):
    def __call__(self, a, b) -> Fraction:
        return hamming_distance(a, b)


class RuleMetric(Metric):
    """Wraps a caller-supplied distance rule."""

    def __init__(self, rule: MetricFn, ultrametric: bool = False):
        self.rule = rule
        self.ultrametric = ultrametric

    def __call__(self, a, b) -> Fraction:
        if a == b:
            return ZERO
        return Fraction(self.rule(a, b))


class TableMetric(Metric):
    """Lookup-table metric over opaque labels, symmetric with a zero diagonal."""

    def __init__(self, labels: Sequence[Hashable], table: dict[tuple, Fraction], ultrametric: bool = False):
        self.labels = list(labels)
        self.index = {label: i for i, label in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise PreconditionError("duplicate labels in table metric")
        n = len(self.labels)
        self.rows = [[ZERO] * n for _ in range(n)]
        missing = []
        for i, j in product(range(n), repeat=2):
            if i >= j:
                continue
            a, b = self.labels[i], self.labels[j]
            fwd, bwd = table.get((a, b)), table.get((b, a))
            if fwd is not None and bwd is not None and fwd != bwd:
                raise FormatError(f"asymmetric entries for ({a}, {b}): {fwd} vs {bwd}")
            value = fwd if fwd is not None else bwd
            if value is None:
                missing.append((a, b))
                continue
            value = Fraction(value)
            if value <= 0:
                raise FormatError(f"distance between distinct {a} and {b} must be positive")
            self.rows[i][j] = self.rows[j][i] = value
        if missing:
            a, b = missing[0]
            raise FormatError(f"incomplete distance table: {len(missing)} missing pairs, first ({a}, {b})")
        for (a, b), value in table.items():
            if a == b and Fraction(value) != 0:
                raise FormatError(f"nonzero self-distance for {a}")
        self.ultrametric = ultrametric

    def __call__(self, a, b) -> Fraction:
        return self.rows[self.index[a]][self.index[b]]


def parse_table_metric(text: str) -> TableMetric:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["a", "b", "num", "den"]:
        raise FormatError("table metric must start with the header a,b,num,den")
    labels: dict[str, None] = {}
    table: dict[tuple, Fraction] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise FormatError(f"line {lineno}: expected 4 columns, got {len(row)}")
        a, b, num, den = (cell.strip() for cell in row)
        value = parse_rational(f"{num}/{den}")
        labels.setdefault(a)
        labels.setdefault(b)
        if (a, b) in table and table[(a, b)] != value:
            raise FormatError(f"line {lineno}: conflicting entry for ({a}, {b})")
        table[(a, b)] = value
    return TableMetric(list(labels), table)


def load_table_metric(path: str | Path) -> TableMetric:
    return parse_table_metric(Path(path).read_text(encoding="utf-8"))


def dump_table_metric(labels: Sequence[Hashable], d: MetricFn) -> str:
    """Serialize the upper triangle of ``d`` over ``labels`` in the CSV table format."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["a", "b", "num", "den"])
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            value = Fraction(d(a, b))
            writer.writerow([a, b, value.numerator, value.denominator])
    return out.getvalue()


@dataclass(frozen=True)
class DistanceMatrix(Metric):
    """Dense integer-scaled distances over element ids ``0..n-1``.

    ``ints[i][j] / scale`` is the exact distance.  Every diversity function in
    this package is homogeneous of degree one, so evaluation can run on the
    integers and divide once at the end.
    """

    items: tuple
    ints: tuple[tuple[int, ...], ...]
    scale: int
    ultrametric: bool = False

    @classmethod
    def from_oracle(cls, items: Iterable, d: MetricFn, ultrametric: bool | None = None) -> "DistanceMatrix":
        items = tuple(items)
        n = len(items)
        values = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                values[i][j] = values[j][i] = Fraction(d(items[i], items[j]))
        scale = 1
        for row in values:
            for v in row:
                scale = math.lcm(scale, v.denominator)
        ints = tuple(tuple(v.numerator * (scale // v.denominator) for v in row) for row in values)
        if ultrametric is None:
            ultrametric = bool(getattr(d, "ultrametric", False))
        return cls(items, ints, scale, ultrametric)

    def __len__(self) -> int:
        return len(self.items)

    def __call__(self, i: int, j: int) -> Fraction:
        return Fraction(self.ints[i][j], self.scale)


@dataclass(frozen=True)
class Violation:
    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_ultrametric(S: Sequence, d: MetricFn) -> Violation:
    """Strong triangle inequality on every triple; the first violating ``(a, b, c)`` is the witness."""
    S = list(S)
    dist = {(a, b): Fraction(d(a, b)) for a in S for b in S}
    for a, b, c in product(S, repeat=3):
        if dist[a, c] > max(dist[a, b], dist[b, c]):
            return Violation(False, (a, b, c))
    return Violation(True)


def is_metric(S: Sequence, d: MetricFn) -> Violation:
    """Identity, symmetry and triangle inequality; witnesses are pairs or triples."""
    S = list(S)
    dist = {(a, b): Fraction(d(a, b)) for a in S for b in S}
    for a, b in product(S, repeat=2):
        if (dist[a, b] == 0) != (a == b) or dist[a, b] < 0 or dist[a, b] != dist[b, a]:
            return Violation(False, (a, b))
    for a, b, c in product(S, repeat=3):
        if dist[a, c] > dist[a, b] + dist[b, c]:
            return Violation(False, (a, b, c))
    return Violation(True)
