import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from divkit.diversity import (
    DIVERSITY_FUNCTIONS,
    MIN,
    SUBSET,
    SUM,
    SUM_MIN,
    WEAK,
    WEAK_SUBSET,
    WEITZMAN,
    delta_min,
    delta_sum,
    delta_sum_min,
    delta_weitzman,
    delta_weitzman_exact,
    delta_weitzman_ultrametric,
    get_diversity,
)
from divkit.errors import CapExceededError, PreconditionError
from divkit.generators import random_ultrametric
from divkit.monotonicity import weitzman_counterexample
from divkit.numeric import TableMetric, urel_distance
from divkit.tree import build_ultrametric_tree
from oracles import pair_sum, weitzman_by_orders


def random_metric(rng, n):
    """Distances in [5, 10]: every such assignment satisfies the triangle inequality."""
    labels = list(range(n))
    return labels, TableMetric(labels, {(a, b): Fraction(rng.randint(5, 10)) for a, b in combinations(labels, 2)})


def equidistant(r):
    return lambda x, y: r if x != y else Fraction(0)


def test_cars_values(cars):
    t1, t2, t3 = cars[:3]
    assert delta_sum([t1, t2], urel_distance) == Fraction(1, 8)
    assert delta_min([t1, t2, t3], urel_distance) == Fraction(1, 16)
    assert delta_weitzman_exact(cars, urel_distance) == Fraction(17, 16)
    assert delta_weitzman_ultrametric(build_ultrametric_tree(cars, urel_distance)) == Fraction(17, 16)


def test_equidistant_values():
    r = Fraction(2, 3)
    d = equidistant(r)
    S = ["a", "b", "c"]
    assert delta_sum(S, equidistant(Fraction(1))) == 3
    assert delta_sum_min(S, d) == 3 * r
    assert delta_weitzman_exact(S, d) == 2 * r
    assert delta_weitzman_ultrametric(build_ultrametric_tree(S, d)) == 2 * r
    assert delta_weitzman_ultrametric(build_ultrametric_tree(S[:2], d)) == r


def test_p3_weitzman(p3_metric):
    S = ["v1", "v2", "v3"]
    assert delta_weitzman_exact(S, p3_metric) == 3 == weitzman_by_orders(S, p3_metric)


def test_counterexample_values():
    inst = weitzman_counterexample()
    d = inst.d
    assert delta_weitzman_exact(inst.A + inst.B, d) == 12
    assert delta_weitzman_exact(inst.A + inst.B2, d) == 11
    assert delta_weitzman_exact(inst.B, d) == 5
    assert delta_weitzman_exact(inst.B2, d) == 6


@pytest.mark.parametrize("name", sorted(DIVERSITY_FUNCTIONS))
def test_singleton_zero_and_positive_otherwise(name):
    f = DIVERSITY_FUNCTIONS[name]
    rng = random.Random(name)
    for _ in range(30):
        labels, m = random_metric(rng, rng.randint(1, 7))
        assert (f(labels, m) == 0) == (len(labels) == 1)


@pytest.mark.parametrize("f", [SUM, MIN, WEITZMAN])
def test_pair_axiom(f):
    rng = random.Random(1)
    labels, m = random_metric(rng, 6)
    for a, b in combinations(labels, 2):
        assert f([a, b], m) == m(a, b)


def test_sum_min_doubles_pairs():
    d = equidistant(Fraction(5))
    assert delta_sum_min(["a", "b"], d) == 10


@given(st.integers(0, 10**6), st.integers(2, 7))
@settings(max_examples=60, deadline=None)
def test_permutation_invariance_and_oracles(seed, n):
    rng = random.Random(seed)
    labels, m = random_metric(rng, n)
    perm = labels[:]
    rng.shuffle(perm)
    for f in DIVERSITY_FUNCTIONS.values():
        assert f(labels, m) == f(perm, m)
    assert delta_sum(labels, m) == pair_sum(labels, m)
    assert delta_weitzman_exact(labels, m) == weitzman_by_orders(labels, m)


def test_large_dp_matches_ultrametric_and_small_route():
    rng = random.Random(11)
    for n in (11, 13, 16):
        labels, m, _ = random_ultrametric(rng, n)
        assert delta_weitzman_exact(labels, m) == delta_weitzman_ultrametric(build_ultrametric_tree(labels, m))
    labels, m = random_metric(rng, 12)
    via_big = delta_weitzman_exact(labels, m)
    # removing one element and re-adding its best gain recovers the value from the small route
    best = max(delta_weitzman_exact([x for x in labels if x != a], m) + min(m(a, b) for b in labels if b != a)
               for a in labels)
    assert via_big == best


def test_weitzman_cap():
    labels = list(range(21))
    d = equidistant(Fraction(1))
    with pytest.raises(CapExceededError, match="ultrametric"):
        delta_weitzman_exact(labels, d)
    rng = random.Random(2)
    labels, m, _ = random_ultrametric(rng, 30)
    assert delta_weitzman(labels, m) == delta_weitzman_ultrametric(build_ultrametric_tree(labels, m))


def test_ultrametric_incrementality_all_a():
    rng = random.Random(4)
    for _ in range(50):
        labels, m, _ = random_ultrametric(rng, rng.randint(2, 9))
        total = delta_weitzman_exact(labels, m)
        for a in labels:
            rest = [b for b in labels if b != a]
            assert total == delta_weitzman_exact(rest, m) + min(m(a, b) for b in rest)


def test_declared_classes():
    for f in (SUM, MIN):
        assert all(f.is_monotone(c, ultrametric=False) for c in (SUBSET, WEAK_SUBSET, WEAK))
    assert WEITZMAN.is_monotone(SUBSET, ultrametric=True)
    assert not WEITZMAN.is_monotone(SUBSET, ultrametric=False)
    assert SUM_MIN.is_monotone(WEAK_SUBSET, ultrametric=True)
    assert not SUM_MIN.is_monotone(SUBSET, ultrametric=True)
    assert SUM_MIN.is_monotone(WEAK, ultrametric=False)
    assert get_diversity("sum-min") is SUM_MIN
    with pytest.raises(PreconditionError):
        get_diversity("max")
