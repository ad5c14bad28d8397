"""Propositional formulas and the implicit tree over assignments and models.

The represented set holds ``(alpha, 0)`` for every assignment ``alpha`` of
``x1..xn`` and ``(alpha, 1)`` for every model.  Two elements are at
distance ``3^-i`` where ``i`` is the length of their longest common prefix,
reading an element as ``alpha`` followed by its bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator

from .errors import FormatError, PreconditionError
from .implicit import ImplicitTree
from .numeric import first_difference

MAX_VARIABLES = 20


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise FormatError(f"expected {ch!r}, found {found!r}", self.pos)
        self.pos += 1

    def parse(self):
        expr = self.disjunction()
        if self.peek():
            raise FormatError(f"unexpected {self.peek()!r}", self.pos)
        return expr

    def disjunction(self):
        expr = self.conjunction()
        while self.peek() == "|":
            self.pos += 1
            expr = Or(expr, self.conjunction())
        return expr

    def conjunction(self):
        expr = self.unary()
        while self.peek() == "&":
            self.pos += 1
            expr = And(expr, self.unary())
        return expr

    def unary(self):
        ch = self.peek()
        if ch == "!":
            self.pos += 1
            return Not(self.unary())
        if ch == "(":
            self.pos += 1
            expr = self.disjunction()
            self.expect(")")
            return expr
        if ch == "x":
            start = self.pos
            self.pos += 1
            digits_start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            digits = self.text[digits_start : self.pos]
            if not digits or int(digits) == 0:
                raise FormatError("variables are written x1, x2, ...", start)
            return Var(int(digits))
        raise FormatError(f"unexpected {ch or 'end of input'!r}", self.pos)


def parse_formula(text: str):
    """Parse ``&``, ``|``, ``!``, parentheses and variables ``x1..xn``."""
    return _Parser(text).parse()


def num_variables(expr) -> int:
    if isinstance(expr, Var):
        return expr.index
    if isinstance(expr, Not):
        return num_variables(expr.arg)
    return max(num_variables(expr.left), num_variables(expr.right))


def evaluate(expr, alpha: tuple[bool, ...]) -> bool:
    if isinstance(expr, Var):
        return alpha[expr.index - 1]
    if isinstance(expr, Not):
        return not evaluate(expr.arg, alpha)
    if isinstance(expr, And):
        return evaluate(expr.left, alpha) and evaluate(expr.right, alpha)
    return evaluate(expr.left, alpha) or evaluate(expr.right, alpha)


class SatHandle(ImplicitTree):
    """Balls are ``("p", beta)`` for partial assignments and ``("l", alpha, bit)`` for single elements.

    A full assignment that is not a model spans a single element and is
    therefore identified with its leaf.  Children list ``False`` before
    ``True`` and bit 0 before bit 1.
    """

    def __init__(self, formula, n: int | None = None):
        super().__init__()
        self.formula = formula
        self.n = num_variables(formula) if n is None else n
        if self.n > MAX_VARIABLES:
            raise PreconditionError(f"at most {MAX_VARIABLES} variables are supported, got {self.n}")

    def cofactor_satisfiable(self, beta: tuple[bool, ...]) -> bool:
        """Whether some completion of the partial assignment satisfies the formula."""
        rest = self.n - len(beta)
        return any(evaluate(self.formula, beta + tail) for tail in product((False, True), repeat=rest))

    def root(self):
        return ("p", ())

    def _ball(self, beta: tuple[bool, ...]):
        if len(beta) == self.n and not self.cofactor_satisfiable(beta):
            return ("l", beta, 0)
        return ("p", beta)

    def _children(self, ball) -> Iterator:
        if ball[0] == "l":
            return iter(())
        beta = ball[1]
        if len(beta) == self.n:
            return iter((("l", beta, 0), ("l", beta, 1)))
        return (self._ball(beta + (v,)) for v in (False, True))

    def _member(self, ball):
        if ball[0] == "l":
            return (ball[1], ball[2])
        beta = ball[1]
        return (beta + (False,) * (self.n - len(beta)), 0)

    def is_singleton(self, ball) -> bool:
        return ball[0] == "l"

    def distance(self, x, y) -> Fraction:
        i = first_difference(x[0] + (x[1],), y[0] + (y[1],))
        if i is None:
            return Fraction(0)
        return Fraction(1, 3**i)

    def radius(self, ball) -> Fraction:
        if ball[0] == "l":
            return Fraction(0)
        return Fraction(1, 3 ** len(ball[1]))

    def universe(self) -> list:
        """All represented elements, by direct enumeration of assignments."""
        out = []
        for alpha in product((False, True), repeat=self.n):
            out.append((alpha, 0))
            if evaluate(self.formula, alpha):
                out.append((alpha, 1))
        return out

    def decode(self, element):
        alpha, bit = element
        return "".join("t" if v else "f" for v in alpha) + f":{bit}"


def sat_implicit_schema(formula: str) -> SatHandle:
    return SatHandle(parse_formula(formula))


def witness_threshold(n: int) -> Fraction:
    """Sum-min value reached by (n + 2)-subsets exactly when the formula has a model."""
    return (3 + Fraction(1, 3**n)) / 2
