from fractions import Fraction
from itertools import combinations, product

import pytest

from divkit.diversity import SUBSET, SUM_MIN, DiversityFunction, delta_sum_min
from divkit.errors import FormatError, PreconditionError
from divkit.explicit import brute_force_oracle
from divkit.implicit import fpt_diverse, greedy_diverse
from divkit.numeric import is_ultrametric
from divkit.sat import evaluate, num_variables, parse_formula, sat_implicit_schema, witness_threshold

FORMULAS = [
    "x1",
    "x1 & !x1",
    "x1 & !x2 | x3",
    "(x1 | x2) & (!x1 | x2) & (x1 | !x2) & (!x1 | !x2)",
    "!(x1 & x2) & (x3 | x4)",
    "x1 & x2 & x3 & x4",
    "(x2 | !x3) & !x2 & x3",
]


def satisfiable(text):
    e = parse_formula(text)
    return any(evaluate(e, a) for a in product((False, True), repeat=num_variables(e)))


def test_parser():
    e = parse_formula(" !x1 | x2 & x3 ")
    assert num_variables(e) == 3
    assert evaluate(e, (False, False, False)) and not evaluate(e, (True, True, False))
    for bad in ["", "x1 &", "x0", "(x1", "x1 x2", "y1"]:
        with pytest.raises(FormatError):
            parse_formula(bad)


def test_leaf_sets():
    h = sat_implicit_schema("x1")
    assert sorted(h.decode(x) for x in h.leaves()) == ["f:0", "t:0", "t:1"]
    h = sat_implicit_schema("x1 & !x1")
    assert sorted(h.decode(x) for x in h.leaves()) == ["f:0", "t:0"]


@pytest.mark.parametrize("text", FORMULAS)
def test_handle_is_a_valid_ultrametric_tree(text):
    h = sat_implicit_schema(text)
    leaves = h.leaves()
    assert sorted(leaves) == sorted(h.universe())
    assert is_ultrametric(leaves, h.distance)
    for ball in h.balls():
        if h.is_singleton(ball):
            continue
        kids = h.children(ball).all()
        assert len(kids) >= 2 and len(set(kids)) == len(kids)
        assert h.member(ball) == h.member(kids[0])
        assert all(h.radius(c) < h.radius(ball) for c in kids)


@pytest.mark.parametrize("text", FORMULAS)
def test_witness_iff_satisfiable(text):
    h = sat_implicit_schema(text)
    n = h.n
    if len(h.universe()) < n + 2:
        assert not satisfiable(text)
        return
    best = fpt_diverse(h, n + 2, SUM_MIN).value
    brute = brute_force_oracle(h.universe(), h, n + 2, SUM_MIN).value
    assert best == brute
    assert (best >= witness_threshold(n)) == satisfiable(text)


def test_threshold_value():
    assert witness_threshold(3) == Fraction(41, 27)


def test_too_many_variables():
    with pytest.raises(PreconditionError):
        sat_implicit_schema(" & ".join(f"x{i}" for i in range(1, 22)))


@pytest.mark.parametrize(
    "text,k,greedy_value,optimum",
    [("x1 & !x2 | x3", 6, Fraction(38, 27), Fraction(40, 27)), ("x1 & x2 & x3 & x4", 6, Fraction(40, 27), Fraction(122, 81))],
)
def test_greedy_sum_min_shortfall_on_sat_instances(text, k, greedy_value, optimum):
    # sum-min is not subset-monotone, so greedy is run through a deliberately over-declared wrapper
    forced = DiversityFunction("sum-min", delta_sum_min, {SUBSET: "any"})
    h = sat_implicit_schema(text)
    assert greedy_diverse(h, k, forced).value == greedy_value
    assert fpt_diverse(h, k, SUM_MIN).value == optimum == brute_force_oracle(h.universe(), h, k, SUM_MIN).value
