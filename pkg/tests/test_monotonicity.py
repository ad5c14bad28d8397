import pytest

from divkit.diversity import MIN, SUBSET, SUM, SUM_MIN, WEAK, WEAK_SUBSET, WEITZMAN
from divkit.errors import PreconditionError
from divkit.monotonicity import (
    MonotonicityInstance,
    bounded_ratio_sampler,
    check_monotonicity,
    fixed_sampler,
    hypotheses_hold,
    random_ultrametric_sampler,
    weitzman_counterexample,
)
from divkit.numeric import is_metric, is_ultrametric

TRIALS = 500


@pytest.mark.parametrize("cls", [SUBSET, WEAK_SUBSET, WEAK])
def test_samplers_satisfy_hypotheses(cls):
    import random

    rng = random.Random(0)
    for sampler, check in ((bounded_ratio_sampler(), is_metric), (random_ultrametric_sampler(), is_ultrametric)):
        for _ in range(50):
            inst = sampler(rng, SUM, cls)
            assert hypotheses_hold(inst, SUM, cls)
            pts = list(dict.fromkeys(inst.A + inst.B + inst.B2))
            assert check(pts, inst.d)


@pytest.mark.parametrize(
    "delta,cls",
    [(SUM, SUBSET), (MIN, SUBSET), (SUM, WEAK), (MIN, WEAK), (SUM_MIN, WEAK)],
)
def test_any_metric_cells(delta, cls):
    assert check_monotonicity(delta, cls, bounded_ratio_sampler(), TRIALS, seed=3)


@pytest.mark.parametrize(
    "delta,cls",
    [(WEITZMAN, SUBSET), (WEITZMAN, WEAK_SUBSET), (SUM_MIN, WEAK_SUBSET), (WEITZMAN, WEAK), (SUM_MIN, WEAK)],
)
def test_ultrametric_cells(delta, cls):
    assert check_monotonicity(delta, cls, random_ultrametric_sampler(), TRIALS, seed=3)


def test_weitzman_counterexample_detected():
    res = check_monotonicity(WEITZMAN, SUBSET, fixed_sampler(weitzman_counterexample()), 5)
    assert not res.passed and res.trials == 1
    assert res.values == (12, 11)


def test_sampler_power_on_unasserted_cells():
    # neither cell is claimed, and the samplers are strong enough to refute both
    assert not check_monotonicity(SUM_MIN, SUBSET, random_ultrametric_sampler(), 10_000, seed=0)
    assert not check_monotonicity(WEITZMAN, SUBSET, bounded_ratio_sampler(4, 5, 1), 10_000, seed=0)


def test_bad_sampler_rejected():
    inst = MonotonicityInstance(("a",), ("a",), ("b",), lambda x, y: 1)
    with pytest.raises(PreconditionError):
        check_monotonicity(SUM, SUBSET, fixed_sampler(inst), 3)
