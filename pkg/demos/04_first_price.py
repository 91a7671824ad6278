"""First-price auctions: multiplier dynamics settle where no bidder shades.

Each run starts from jittered multipliers.  Runs whose final profile passes the
best-response certificate reach the optimal welfare.
"""
import numpy as np

from boostauction import FPA, certify_best_responses, clear, liquid_welfare, run_dynamics
from boostauction import optimal_welfare_no_budget, uniform_bids
from boostauction.suites import fpa_config, random_instance

rng = np.random.default_rng(1)
for k in range(8):
    inst = random_instance(rng)
    trace = run_dynamics(inst, fpa_config(seed=k))
    alpha = trace.final.alpha
    ok, _ = certify_best_responses(inst, FPA, None, alpha)
    wel = liquid_welfare(inst, clear(inst, uniform_bids(inst, alpha), None, FPA))
    opt, _ = optimal_welfare_no_budget(inst)
    print(f"run {k}: iterations={len(trace.records) - 1:<4} converged={trace.converged!s:<5} "
          f"certified={ok!s:<5} welfare/opt={wel / opt:.6f}")
