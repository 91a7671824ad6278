import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boostauction.auction import FPA, GSP, VCG, run_vcg
from boostauction.bidder import (ALPHA_MAX, LOG_RATIO_CLAMP, BidderLedger, LearningRate,
                                 best_uniform_response, certify_best_responses, classify_ledger,
                                 classify_profile, ledger_from_outcome, uniform_bids,
                                 update_multipliers)
from boostauction.boosts import uniform_boosts
from boostauction.fixtures import example_fpa, example_gsp, example_lower_bound
from boostauction.instance import GeneratorParams, ProblemInstance, generate_instance


def ledger(value, spend, target=None):
    value, spend = np.atleast_1d(np.asarray(value, float)), np.atleast_1d(np.asarray(spend, float))
    target = value if target is None else np.atleast_1d(np.asarray(target, float))
    return BidderLedger(value, spend, target)


def test_uniform_bids():
    inst = example_lower_bound(d=1, eps=0.1)
    assert np.array_equal(uniform_bids(inst, [1.0, 1.0]), inst.values)
    b = uniform_bids(inst, [11.0, 1.0])
    assert b[0].tolist() == pytest.approx([22.0, 1.1])
    with pytest.raises(ValueError):
        uniform_bids(inst, [0.0, 1.0])
    with pytest.raises(ValueError):
        uniform_bids(inst, [1.0])


def test_ledger_lower_bound_profile():
    inst = example_lower_bound(d=1, eps=0.1)
    led = ledger_from_outcome(inst, run_vcg(inst, uniform_bids(inst, [11.0, 1.0])))
    assert led.value[0] == pytest.approx(2.1)
    assert led.spend[0] == pytest.approx(1.0)
    assert led.target[0] == pytest.approx(2.1)
    assert led.value[1] == 0 and led.spend[1] == 0 and led.target[1] == 0


def test_ledger_target_capped_by_budget():
    inst = ProblemInstance([[10.0], [1.0]], [1], [[1.0]], budgets=[4.0, None])
    led = ledger_from_outcome(inst, run_vcg(inst, inst.values))
    assert led.value[0] == 10.0 and led.target[0] == 4.0


def test_classify_examples():
    inst = example_lower_bound(d=1, eps=0.1)
    assert classify_profile(inst, VCG, None, [1.0, 1.0]).feasible.all()
    assert classify_profile(inst, VCG, None, [11.0, 1.0]).in_theta
    low = classify_profile(inst, VCG, None, [0.5, 1.0])
    assert not low.undominated[0] and not low.in_theta


def test_classify_low_multiplier_ok_once_budget_spent():
    inst = ProblemInstance([[10.0], [8.0]], [1], [[1.0]], budgets=[4.0, None])
    # a multiplier below 1 is undominated only when spend has reached the budget
    feas, undom = classify_ledger(inst, [0.5, 1.0], ledger([4.0, 0.0], [4.0, 0.0], [4.0, 0.0]))
    assert undom[0] and feas[0]
    feas, undom = classify_ledger(inst, [0.5, 1.0], ledger([4.0, 0.0], [3.0, 0.0], [4.0, 0.0]))
    assert not undom[0]


def test_update_fixed_point():
    a = np.array([0.7, 3.0])
    assert np.allclose(update_multipliers(a, ledger([2.0, 5.0], [2.0, 5.0]), 0.3), a)
    # a loser has spend = target = 0 and keeps its multiplier
    assert update_multipliers([2.5], ledger(0.0, 0.0), 0.5)[0] == 2.5


def test_update_examples():
    assert update_multipliers([1.0], ledger(4.0, 1.0), 0.5)[0] == pytest.approx(2.0)
    up = update_multipliers([2.0], ledger(1.0, 0.0), 1.0)[0]
    assert up == pytest.approx(2.0 * math.exp(LOG_RATIO_CLAMP))
    assert update_multipliers([ALPHA_MAX / 2], ledger(1.0, 0.0), 1.0)[0] == ALPHA_MAX
    down = update_multipliers([2.0], ledger(0.0, 1.0, 0.0), 1.0)[0]
    assert down == pytest.approx(2.0 * math.exp(-LOG_RATIO_CLAMP))


def test_update_rejects_bad_rate():
    for eta in (0.0, 1.5):
        with pytest.raises(ValueError):
            update_multipliers([1.0], ledger(1.0, 1.0), eta)


@settings(max_examples=200, deadline=None)
@given(alpha=st.floats(1e-3, 1e3), value=st.floats(0.0, 100.0), spend=st.floats(0.0, 100.0),
       eta=st.floats(0.01, 1.0))
def test_update_sign_correctness(alpha, value, spend, eta):
    nxt = update_multipliers([alpha], ledger(value, spend), eta)[0]
    if spend < value:
        assert nxt >= alpha * (1 - 1e-12)
    elif spend > value:
        assert nxt <= alpha * (1 + 1e-12)
    else:
        assert nxt == pytest.approx(alpha)


def test_learning_rate_schedule():
    lr = LearningRate()
    assert [lr(t) for t in (1, 10)] == [0.3, 0.3]
    assert lr(11) == pytest.approx(0.3 / math.sqrt(2))
    assert lr(34) == pytest.approx(0.3 / 5)
    assert LearningRate(0.5, 0, decay=False)(1000) == 0.5


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.floats(0.0, 3.0), mech=st.sampled_from([VCG, GSP]))
def test_truthful_multipliers_always_feasible(seed, c, mech):
    inst = generate_instance(GeneratorParams(n=4, m=5, seed=seed))
    cls = classify_profile(inst, mech, uniform_boosts(inst, c), np.ones(4))
    assert cls.feasible.all()


def test_gsp_best_uniform_response():
    br = best_uniform_response(example_gsp(), GSP, None, np.ones(3), 0)
    assert br.best_value == pytest.approx(1.0)
    assert not br.improves


def test_fpa_truthful_profile_is_certified():
    ok, responses = certify_best_responses(example_fpa(), FPA, None, np.ones(2))
    assert ok
    assert [r.current_value for r in responses] == pytest.approx([4.0, 2.0])


def test_certificate_catches_improvable_profile():
    # bidder 2 shades so low it loses an auction it could win below value
    inst = example_fpa()
    ok, responses = certify_best_responses(inst, FPA, None, [1.0, 0.1])
    assert not ok
    assert responses[1].improves and responses[1].best_alpha <= 1.0 + 1e-9
