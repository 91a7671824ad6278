import json

import numpy as np
import pytest

from boostauction.auction import VCG
from boostauction.bidder import classify_profile
from boostauction.boosts import is_value_competitive
from boostauction.instance import ProblemInstance
from boostauction.suites import (SUITES, SuiteResult, payment_sandwich, random_budgeted_instance,
                                 random_instance, random_value_competitive_boosts, run_suites,
                                 sample_theta_profile)


def test_samplers_respect_bounds():
    rng = np.random.default_rng(0)
    for _ in range(50):
        inst = random_instance(rng)
        n, m = inst.values.shape
        assert 2 <= n <= 5 and 1 <= m <= 6 and inst.slots.max() <= 3
        c = float(rng.choice([0.0, 0.6, 2.0]))
        assert is_value_competitive(random_value_competitive_boosts(inst, c, rng), inst, c)
        alpha = sample_theta_profile(inst, VCG, None, rng)
        if alpha is not None:
            assert np.all(alpha >= 1.0)
            assert classify_profile(inst, VCG, None, alpha).in_theta
    aug = random_budgeted_instance(rng)
    aug.order.check(aug.instance)


def test_payment_sandwich_flags_bad_payments():
    inst = ProblemInstance([[1.0], [1.0]], [1], [[1.0]])
    count, bad = payment_sandwich(inst, np.array([[2.0], [1.0]]), np.zeros((2, 1)))
    assert count == 1 and bad == []


@pytest.mark.parametrize("name", sorted(SUITES))
def test_each_suite_runs_clean(name):
    kw = {"samples": 10, "seed": 1}
    res = SUITES[name](**kw) if name != "sandwich" else SUITES[name](clearings=500, **kw)
    assert res.ok, res.violations
    assert res.line().startswith("PASS")
    json.dumps(res.to_dict())


def test_suites_are_deterministic():
    a = [r.to_dict() for r in run_suites(["value_boost", "benchmark_boost"], 20, 3)]
    b = [r.to_dict() for r in run_suites(["value_boost", "benchmark_boost"], 20, 3)]
    assert a == b


def test_run_suites_rejects_unknown():
    with pytest.raises(ValueError):
        run_suites(["nope"], 1, 0)


def test_suite_result_slack():
    res = SuiteResult("x")
    assert res.ok and "min_slack=n/a" in res.line()
    res.note_slack(0.3)
    res.note_slack(0.1)
    res.note_slack(0.2)
    assert res.min_slack == 0.1
    res.violations.append({})
    assert not res.ok and res.line().startswith("FAIL")
