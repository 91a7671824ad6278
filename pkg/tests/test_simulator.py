import csv
import io

import numpy as np
import pytest

from boostauction.bidder import LearningRate
from boostauction.boosts import BENCHMARK, UNIFORM, uniform_boosts
from boostauction.fixtures import example_lower_bound, lower_bound_profile
from boostauction.instance import (GeneratorParams, ProblemInstance, assign_budgets_via_benchmark,
                                   generate_instance)
from boostauction.metrics import PASS, approx_ratio, check_ratio_bound
from boostauction.simulator import (BOOSTED, FINAL, PRETRAIN, ExperimentConfig, detect_convergence,
                                    format_lift_table, resolve_mechanism, run_batch, run_dynamics,
                                    run_sweep)


def augmented(seed, n=5, m=20, rho=0.5):
    inst = generate_instance(GeneratorParams(n=n, m=m, slots_max=3, seed=seed))
    return assign_budgets_via_benchmark(inst, rho, seed=seed + 1000)


def test_zero_iterations_gives_initial_record():
    tr = run_dynamics(example_lower_bound(), ExperimentConfig(pretrain_iters=0, boosted_iters=0))
    assert len(tr.records) == 1
    assert tr.final.phase == FINAL and tr.final.iteration == 0
    assert np.array_equal(tr.final.alpha, [1.0, 1.0])


def test_record_count_and_phases():
    tr = run_dynamics(example_lower_bound(), ExperimentConfig(pretrain_iters=4, boosted_iters=3))
    assert [r.phase for r in tr.records] == [PRETRAIN] * 4 + [BOOSTED] * 3 + [FINAL]
    assert [r.iteration for r in tr.records] == list(range(8))


def test_single_bidder_reaches_fixed_point():
    inst = ProblemInstance([[2.0, 1.0]], [1, 2], [[1.0], [1.0, 0.5]])
    for mech in ("vcg", "gsp"):
        tr = run_dynamics(inst, ExperimentConfig(mechanism=mech, pretrain_iters=5, boosted_iters=5))
        # uncontested, it wins everything at price 0 and its multiplier only rises
        assert tr.final.welfare == pytest.approx(3.0)
        assert np.all(np.diff(tr.alphas[:, 0]) >= 0)
    tr = run_dynamics(inst, ExperimentConfig(mechanism="fpa", pretrain_iters=80, boosted_iters=0,
                                             eta=LearningRate(0.5, 0, decay=False),
                                             initial_alpha=0.5, tol=1e-9, early_stop=True))
    assert tr.converged
    assert tr.final.alpha[0] == pytest.approx(1.0)


def test_lower_bound_instance_keeps_bound_inside_theta():
    inst = example_lower_bound(d=1, eps=0.1)
    boosts = uniform_boosts(inst, 1.0)
    seen = 0
    starts = [lower_bound_profile(1.0, 0.1)] + [None] * 5
    for seed, a0 in enumerate(starts):
        cfg = ExperimentConfig(scheme=UNIFORM, c=1.0, pretrain_iters=0 if a0 is not None else 10,
                               boosted_iters=20, initial_spread=0.5, seed=seed)
        for rec in run_dynamics(inst, cfg, alpha=a0).phase(BOOSTED):
            if rec.in_theta:
                seen += 1
                assert rec.welfare >= approx_ratio(1.0) * 3.0 - 1e-9
                chk = check_ratio_bound(inst, "vcg", boosts, rec.alpha, "opt", c=1.0)
                assert chk.status == PASS
    assert seen > 0


def test_detect_convergence_examples():
    assert detect_convergence([np.ones(2)] * 4)
    assert not detect_convergence([np.ones(2) * (2.0 if t % 2 else 1.0) for t in range(6)])
    # step sizes 1e-1, 1e-2, ... : the first window of three sub-tol steps closes at step 7
    logs = np.cumsum([0.0] + [10.0 ** -k for k in range(1, 10)])
    alphas = [np.exp([x]) for x in logs]
    first = next(t for t in range(2, len(alphas) + 1) if detect_convergence(alphas[:t]))
    assert first == 8
    assert not detect_convergence([np.ones(1), np.ones(1)])
    with pytest.raises(ValueError):
        detect_convergence([np.ones(1)])


def test_config_validation():
    for bad in (dict(pretrain_iters=-1), dict(c=-0.5), dict(mechanism="dutch"),
                dict(summary_window=0)):
        with pytest.raises(ValueError):
            run_dynamics(example_lower_bound(), ExperimentConfig(**bad))
    assert resolve_mechanism("FPA-uniform-enforced") == "fpa"
    cfg = ExperimentConfig(eta=LearningRate(0.2, 3, decay=False))
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_fpa_rejects_boosts():
    with pytest.raises(ValueError):
        run_dynamics(example_lower_bound(), ExperimentConfig(mechanism="fpa", scheme=UNIFORM, c=1.0))


def test_empty_sweep_has_baseline_only():
    rep = run_sweep(example_lower_bound(), [], ExperimentConfig(pretrain_iters=3, boosted_iters=3))
    assert rep.rows == [] and rep.traces == []
    assert rep.baseline.label == "baseline"
    table = rep.format_table()
    assert table.splitlines()[-1].startswith("baseline")
    assert len(table.splitlines()) == 3


def test_baseline_normalizes_to_one():
    aug = augmented(0)
    rep = run_sweep(aug.instance, [(UNIFORM, 0.0)], ExperimentConfig(), aug.order)
    w, r = rep.normalized(rep.baseline)
    assert np.allclose(w, 1.0) and np.allclose(r[np.isfinite(r)], 1.0)
    # zero-weight boosts reproduce the baseline exactly
    row = rep.rows[0]
    assert row.welfare_lift == 0.0 and row.revenue_lift == 0.0


def test_benchmark_beats_uniform_at_low_weight():
    items = [(a.instance, a.order) for a in (augmented(s) for s in range(8))]
    batch = run_batch(items, [(UNIFORM, 0.3), (BENCHMARK, 0.3)], ExperimentConfig())
    lifts = batch.mean("welfare_lift")
    assert lifts["benchmark-0.3"] >= lifts["uboost-0.3"]


def test_sweep_is_deterministic_and_csv_shape():
    aug = augmented(4, n=3, m=5)
    cfg = ExperimentConfig(pretrain_iters=5, boosted_iters=5, initial_spread=0.3, seed=11)
    schemes = [(UNIFORM, 0.5), (BENCHMARK, 0.5)]
    a = run_sweep(aug.instance, schemes, cfg, aug.order)
    b = run_sweep(aug.instance, schemes, cfg, aug.order)
    assert a.to_csv() == b.to_csv()
    rows = list(csv.reader(io.StringIO(a.to_csv())))
    head = rows[0]
    assert head[:3] == ["iteration", "phase", "scheme"]
    assert "alpha_2" in head and "normalized_welfare" in head
    assert len(rows) == 1 + 3 * 11
    assert {r[2] for r in rows[1:]} == {"baseline", "uboost-0.5", "benchmark-0.5"}


def test_shared_pretrain():
    aug = augmented(2, n=3, m=6)
    cfg = ExperimentConfig(pretrain_iters=6, boosted_iters=4)
    rep = run_sweep(aug.instance, [(UNIFORM, 1.0)], cfg, aug.order)
    for x, y in zip(rep.baseline.phase(PRETRAIN), rep.traces[0].phase(PRETRAIN)):
        assert x is y


def test_settled_averages_tail():
    tr = run_dynamics(example_lower_bound(), ExperimentConfig(pretrain_iters=3, boosted_iters=3,
                                                              summary_window=2))
    w, r = tr.settled()
    assert w == pytest.approx(tr.welfare[-2:].mean())
    assert tr.settled(1) == (tr.final.welfare, tr.final.revenue)


def test_lift_table_format():
    rows = [{"label": "uboost-0.3", "welfare_lift": 0.0123456789, "revenue_lift": -0.05,
             "initial_welfare_lift": 0.0, "initial_revenue_lift": -0.1}]
    text = format_lift_table("vcg", rows)
    lines = text.splitlines()
    assert "VCG Welfare" in lines[0]
    assert "+1.23457%" in lines[3] and "-5%" in lines[3] and "-10%" in lines[3]
