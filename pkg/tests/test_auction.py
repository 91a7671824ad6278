import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boostauction.auction import (FPA, GSP, VCG, clear, rank_scores, received_values, run_fpa,
                                  run_gsp, run_vcg)
from boostauction.bidder import uniform_bids
from boostauction.fixtures import (FPA_NON_UNIFORM_BIDS, GSP_NON_UNIFORM_BIDS, example_fpa,
                                   example_gsp, example_lower_bound)
from boostauction.instance import ProblemInstance
from boostauction.metrics import liquid_welfare


def single(values, pos=(1.0,)):
    return ProblemInstance([[v] for v in values], [len(pos)], [list(pos)])


def test_rank_scores_sum_and_sort():
    inst = single([1.0, 1.0])
    assert rank_scores(inst, [[3.0], [2.0]], [[0.5], [1.0]], 0) == [(0, 3.5), (1, 3.0)]


def test_rank_scores_ties_and_zeros():
    inst = single([1.0, 1.0, 1.0])
    assert [i for i, _ in rank_scores(inst, [[2.0], [2.0], [1.0]], None, 0)] == [0, 1, 2]
    assert rank_scores(inst, np.zeros((3, 1)), None, 0) == [(0, 0.0), (1, 0.0), (2, 0.0)]


def test_vcg_single_slot_boosted():
    inst = single([1.0, 1.0])
    out = run_vcg(inst, [[3.0], [2.0]], [[0.5], [1.0]])
    assert out.winners[0, 0] == 0
    assert out.payments[0, 0] == pytest.approx(2.5)
    assert out.payments[1, 0] == 0.0


def test_single_bidder_pays_nothing():
    inst = single([2.0])
    for mech in (VCG, GSP):
        out = clear(inst, [[5.0]], [[1.0]], mech)
        assert out.winners[0, 0] == 0 and out.payments[0, 0] == 0.0


def test_lower_bound_profile_outcome():
    inst = example_lower_bound(d=1, eps=0.1)
    out = run_vcg(inst, uniform_bids(inst, [11.0, 1.0]))
    assert (out.winners[:, 0] == 0).all()
    assert out.payments[0].tolist() == pytest.approx([0.0, 1.0])
    assert liquid_welfare(inst, out) == pytest.approx(2.1)


def test_gsp_example():
    inst = example_gsp()
    out = run_gsp(inst, GSP_NON_UNIFORM_BIDS)
    assert out.slot_of(0, 0) == 1
    assert out.payments[0].tolist() == pytest.approx([0.0, 1.0])
    assert received_values(inst, out)[0] == pytest.approx(1.7)


def test_fpa_examples():
    inst = example_fpa()
    out = run_fpa(inst, FPA_NON_UNIFORM_BIDS)
    assert (out.winners[:, 0] == 0).all()
    assert out.payments[0].sum() == pytest.approx(5.0)
    assert received_values(inst, out)[0] == pytest.approx(5.0)
    out = run_fpa(inst, inst.values)
    assert received_values(inst, out).tolist() == pytest.approx([4.0, 2.0])
    solo = single([1.0])
    assert run_fpa(solo, [[0.7]]).payments[0, 0] == pytest.approx(0.7)


def test_fpa_rejects_boosts():
    with pytest.raises(ValueError):
        run_fpa(example_fpa(), example_fpa().values, np.ones((2, 2)))


def test_multi_slot_vcg_and_gsp_by_hand():
    # three bidders, two slots, pos (1, 0.5); bids 4, 3, 1; no boosts
    inst = single([1.0, 1.0, 1.0], pos=(1.0, 0.5))
    bids = [[4.0], [3.0], [1.0]]
    vcg, gsp = run_vcg(inst, bids), run_gsp(inst, bids)
    # top: 3 * (1 - 0.5) + 1 * 0.5; second: 1 * 0.5
    assert vcg.payments[:, 0].tolist() == pytest.approx([2.0, 0.5, 0.0])
    assert gsp.payments[:, 0].tolist() == pytest.approx([3.0, 0.5, 0.0])


def test_fewer_bidders_than_slots():
    inst = single([1.0, 1.0], pos=(1.0, 0.8, 0.6))
    out = run_vcg(inst, [[2.0], [1.0]])
    assert out.winners[0].tolist() == [0, 1, -1]
    assert out.payments[:, 0].tolist() == pytest.approx([0.2, 0.0])


def test_bad_inputs():
    inst = single([1.0, 1.0])
    with pytest.raises(ValueError):
        run_vcg(inst, [[1.0]])
    with pytest.raises(ValueError):
        run_vcg(inst, [[-1.0], [1.0]])
    with pytest.raises(ValueError):
        clear(inst, [[1.0], [1.0]], None, "dutch")


def test_outcome_serialization():
    out = run_vcg(example_lower_bound(), [[2.0, 0.1], [0.0, 1.0]])
    doc = out.to_dict()
    assert doc["assignment"] == [[0], [1]]
    assert len(doc["payments"]) == 2 and len(doc["scores"]) == 2
    x = out.allocation()
    assert x.shape == (2, 2, 1) and x.sum() == 2


@st.composite
def clearing(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(1, 4))
    slots = draw(st.lists(st.integers(1, 3), min_size=m, max_size=m))
    pos = [sorted(draw(st.lists(st.floats(0.05, 1.0), min_size=s, max_size=s)), reverse=True)
           for s in slots]
    vals = st.floats(0.0, 10.0, allow_nan=False)
    v = np.array(draw(st.lists(st.lists(vals, min_size=m, max_size=m), min_size=n, max_size=n)))
    b = np.array(draw(st.lists(st.lists(vals, min_size=m, max_size=m), min_size=n, max_size=n)))
    z = np.array(draw(st.lists(st.lists(st.floats(0.0, 5.0), min_size=m, max_size=m),
                               min_size=n, max_size=n)))
    return ProblemInstance(v, slots, pos), b, z


@settings(max_examples=150, deadline=None)
@given(case=clearing())
def test_outcome_invariants(case):
    inst, b, z = case
    vcg, gsp = run_vcg(inst, b, z), run_gsp(inst, b, z)
    assert np.array_equal(vcg.winners, gsp.winners)
    pos = inst.pos_matrix
    for j in range(inst.num_auctions):
        row = vcg.winners[j]
        won = row[row >= 0]
        assert len(set(won.tolist())) == won.size
        assert won.size == min(inst.num_bidders, inst.slots[j])
        scores = b[:, j] + z[:, j]
        assert np.all(np.diff(scores[won]) <= 0)
        losers = np.setdiff1d(np.arange(inst.num_bidders), won)
        assert not vcg.payments[losers, j].any() and not gsp.payments[losers, j].any()
        for k, i in enumerate(won):
            cap = b[i, j] * pos[j, k]
            assert 0 <= vcg.payments[i, j] <= gsp.payments[i, j] + 1e-9
            assert gsp.payments[i, j] <= cap + 1e-9 * max(1.0, cap)


@settings(max_examples=100, deadline=None)
@given(case=clearing(), bump=st.floats(0.0, 3.0), who=st.integers(0, 4))
def test_extra_boost_never_raises_own_payment(case, bump, who):
    inst, b, z = case
    i = who % inst.num_bidders
    z2 = z.copy()
    z2[i] += bump
    for mech in (VCG, GSP):
        before, after = clear(inst, b, z, mech), clear(inst, b, z2, mech)
        for j in range(inst.num_auctions):
            k0, k1 = before.slot_of(i, j), after.slot_of(i, j)
            if k0 is not None and k0 == k1:
                assert after.payments[i, j] <= before.payments[i, j] + 1e-9


@settings(max_examples=100, deadline=None)
@given(case=clearing())
def test_single_slot_unboosted_vcg_is_second_price(case):
    inst, b, _ = case
    one = ProblemInstance(inst.values, np.ones(inst.num_auctions, dtype=int),
                          [[1.0]] * inst.num_auctions)
    out = run_vcg(one, b)
    for j in range(one.num_auctions):
        top = out.winners[j, 0]
        second = np.sort(b[:, j])[-2] if one.num_bidders > 1 else 0.0
        assert out.payments[top, j] == pytest.approx(second)
