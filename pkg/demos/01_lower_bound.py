"""Two bidders, two auctions: how overbidding costs welfare, and how boosts cap the loss.

Bidder 1 values auction 1 at 1 + d and auction 2 at eps; bidder 2 values only
auction 2, at 1.  The optimum gives each bidder its own auction.  With a high
enough multiplier bidder 1 wins both and still meets its return-on-spend
target, so welfare drops to 1 + d + eps.  Once the guaranteed ratio for
weight c exceeds that loss (c = 2 here), the same kind of profile can no
longer meet the constraints and drops out of Theta.
"""
import numpy as np

from boostauction import VCG, classify_profile, liquid_welfare, optimal_welfare_no_budget
from boostauction.boosts import uniform_boosts
from boostauction.fixtures import example_lower_bound, lower_bound_profile
from boostauction.metrics import approx_ratio

d, eps = 1.0, 0.1
inst = example_lower_bound(d, eps)
opt, _ = optimal_welfare_no_budget(inst)
print(f"values:\n{inst.values}\noptimal welfare: {opt:g}\n")

for c in (0.0, 0.5, 1.0, 2.0):
    alpha = lower_bound_profile(c, eps)
    cls = classify_profile(inst, VCG, uniform_boosts(inst, c), alpha)
    wel = liquid_welfare(inst, cls.outcome)
    print(f"c={c:<4g} alpha={np.round(alpha, 3)} winners={cls.outcome.winners[:, 0]} "
          f"welfare={wel:.4g} ratio={wel / opt:.4f} bound={approx_ratio(c):.4f} "
          f"in Theta={cls.in_theta}")
