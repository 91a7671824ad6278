"""Position auctions with additive boosts for uniform-bidding auto-bidders."""
from .auction import FPA, GSP, VCG, AuctionOutcome, clear, rank_scores, run_fpa, run_gsp, run_vcg
from .bidder import (BidderLedger, LearningRate, certify_best_responses, classify_profile,
                     ledger_from_outcome, uniform_bids, update_multipliers)
from .boosts import (BoostMatrix, apply_seller_cost, benchmark_boosts, is_benchmark_competitive,
                     is_value_competitive, make_boosts, uniform_boosts, zero_boosts)
from .fixtures import replay_examples
from .instance import (UNBOUNDED, BenchmarkOrder, GeneratorParams, ProblemInstance,
                       assign_budgets_via_benchmark, generate_instance, load_instance,
                       save_instance, validate_instance)
from .metrics import (benchmark_welfare, check_ratio_bound, liquid_welfare,
                      optimal_liquid_welfare_bruteforce, optimal_welfare_no_budget, revenue)
from .simulator import (ExperimentConfig, SimulationTrace, SweepReport, detect_convergence,
                        run_batch, run_dynamics, run_sweep)

__version__ = "0.1.0"
