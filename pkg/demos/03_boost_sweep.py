"""Pre-train auto-bidders without boosts, then switch boosts on and compare.

Budgets come from a benchmark ranking with some bidders scaled down, so the
benchmark allocation is optimal.  Lifts are relative to the no-boost
continuation from the same pre-trained multipliers.
"""
from boostauction import ExperimentConfig, GeneratorParams, generate_instance, run_batch
from boostauction.instance import assign_budgets_via_benchmark

items = []
for seed in range(30):
    inst = generate_instance(GeneratorParams(n=5, m=30, slots_max=3, bidder_shift_sigma=0.5,
                                             seed=seed))
    aug = assign_budgets_via_benchmark(inst, 0.5, (0.05, 0.5), seed=seed + 10_000)
    items.append((aug.instance, aug.order))

schemes = [(s, c) for s in ("uniform", "benchmark") for c in (0.3, 0.9, 1.5)]
batch = run_batch(items, schemes, ExperimentConfig())
print(batch.format_table())
