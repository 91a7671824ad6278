"""Uniform-bidding auto-bidders.

Every bidder holds one multiplier ``alpha_i`` and bids ``alpha_i * v_ij``
everywhere.  She wants as much value as possible while keeping total payment
below both its received value (ROAS target normalised to 1) and its budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .auction import AuctionOutcome, clear, received_values
from .boosts import as_boost_array
from .instance import ProblemInstance

CLASSIFY_TOL = 1e-9
LOG_RATIO_CLAMP = math.log(10.0)
ALPHA_MIN = 1e-6
ALPHA_MAX = 1e6


def check_multipliers(alpha, n: int | None = None) -> np.ndarray:
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if n is not None and a.size != n:
        raise ValueError(f"expected {n} multipliers, got {a.size}")
    if not (np.isfinite(a).all() and (a > 0).all()):
        raise ValueError("multipliers must be positive and finite")
    return a


def uniform_bids(inst: ProblemInstance, alpha) -> np.ndarray:
    a = check_multipliers(alpha, inst.num_bidders)
    return a[:, None] * inst.values


@dataclass(frozen=True, eq=False)
class BidderLedger:
    value: np.ndarray
    spend: np.ndarray
    target: np.ndarray


def ledger_from_outcome(inst: ProblemInstance, outcome: AuctionOutcome) -> BidderLedger:
    value = received_values(inst, outcome.winners)
    spend = outcome.payments.sum(axis=1)
    return BidderLedger(value, spend, np.minimum(inst.budgets, value))


@dataclass(frozen=True, eq=False)
class ProfileClass:
    feasible: np.ndarray
    undominated: np.ndarray
    ledger: BidderLedger
    outcome: AuctionOutcome

    @property
    def in_theta(self) -> bool:
        return bool(self.feasible.all() and self.undominated.all())


def classify_ledger(inst: ProblemInstance, alpha, ledger: BidderLedger,
                    tol: float = CLASSIFY_TOL) -> tuple:
    """``(feasible, undominated)`` boolean arrays for one ledger."""
    a = np.asarray(alpha, dtype=float)
    cap = np.minimum(ledger.value, inst.budgets)
    feasible = ledger.spend <= cap + tol * np.maximum(1.0, cap)
    finite = np.isfinite(inst.budgets)
    b = np.where(finite, inst.budgets, 0.0)
    hit_budget = finite & (ledger.spend >= b - tol * np.maximum(1.0, b))
    undominated = (a >= 1 - tol) | hit_budget
    return feasible, undominated


def classify_profile(inst: ProblemInstance, mechanism: str, boosts, alpha,
                     tol: float = CLASSIFY_TOL) -> ProfileClass:
    """Feasibility / undominatedness of each bidder; ``in_theta`` if all pass.

    A multiplier below 1 is only undominated once the bidder has spent her
    budget, because VCG and GSP charge at most the bid.
    """
    outcome = clear(inst, uniform_bids(inst, alpha), boosts, mechanism)
    ledger = ledger_from_outcome(inst, outcome)
    feasible, undominated = classify_ledger(inst, alpha, ledger, tol)
    return ProfileClass(feasible, undominated, ledger, outcome)


def update_multipliers(alpha, ledger: BidderLedger, eta: float,
                       clamp: float = LOG_RATIO_CLAMP,
                       alpha_min: float = ALPHA_MIN, alpha_max: float = ALPHA_MAX) -> np.ndarray:
    """One synchronous log-space step towards each bidder's target spend.

    ``log a' = (1 - eta) log a + eta log(a * target / spend)``: a convex
    combination of the current multiplier and the multiplier that would scale
    spend onto target.  ``log(target / spend)`` is clipped to ``[-clamp, clamp]``;
    zero spend counts as ``+clamp`` and zero target with positive spend as
    ``-clamp``.  A bidder with ``spend == target`` (a loser has both at 0) keeps
    its multiplier.
    """
    if not 0 < eta <= 1:
        raise ValueError(f"learning rate must be in (0, 1], got {eta}")
    a = check_multipliers(alpha)
    spend, target = ledger.spend, ledger.target
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.log(target / spend)
    ratio = np.where(spend > 0, ratio, clamp)
    ratio = np.where((spend > 0) & (target <= 0), -clamp, ratio)
    ratio = np.where(spend == target, 0.0, np.clip(ratio, -clamp, clamp))
    log_a = np.log(a)
    nxt = (1 - eta) * log_a + eta * (log_a + ratio)
    return np.clip(np.exp(nxt), alpha_min, alpha_max)


@dataclass(frozen=True)
class LearningRate:
    """``eta_t = base`` for ``t <= warm`` (1-based), then ``base / sqrt(t - warm + 1)``.

    ``decay=False`` keeps the rate constant.
    """

    base: float = 0.3
    warm: int = 10
    decay: bool = True

    def __call__(self, t: int) -> float:
        if not self.decay or t <= self.warm:
            return self.base
        return self.base / math.sqrt(t - self.warm + 1)


def _candidate_multipliers(inst: ProblemInstance, z: np.ndarray, alpha: np.ndarray, i: int,
                           grid: np.ndarray) -> np.ndarray:
    # Bidder i's allocation only changes where its score crosses a rival's,
    # so probing each crossing (and just either side of it) covers every
    # outcome the grid could miss.
    v = inst.values
    scores = alpha[:, None] * v + z
    others = np.delete(np.arange(inst.num_bidders), i)
    cand = [grid, [alpha[i], 1.0]]
    for j in np.nonzero(v[i] > 0)[0]:
        t = (scores[others, j] - z[i, j]) / v[i, j]
        t = t[t > 0]
        cand.extend([t, t * (1 + 1e-7), t * (1 - 1e-7)])
    out = np.unique(np.concatenate([np.atleast_1d(np.asarray(c, dtype=float)) for c in cand]))
    return out[(out > 0) & np.isfinite(out)]


DEFAULT_BR_GRID = np.logspace(-3, 3, 200)


@dataclass(frozen=True)
class BestResponse:
    bidder: int
    current_value: float
    best_value: float
    best_alpha: float
    current_feasible: bool

    @property
    def improves(self) -> bool:
        return self.best_value > self.current_value + CLASSIFY_TOL * max(1.0, self.current_value)


def best_uniform_response(inst: ProblemInstance, mechanism: str, boosts, alpha, i: int,
                          grid=DEFAULT_BR_GRID, tol: float = CLASSIFY_TOL) -> BestResponse:
    """Best feasible value bidder ``i`` can reach by changing only its multiplier."""
    z = as_boost_array(boosts, inst)
    a = check_multipliers(alpha, inst.num_bidders).copy()
    here = classify_profile(inst, mechanism, z, a, tol)
    cur_val = float(here.ledger.value[i])
    best_val, best_a = (cur_val, float(a[i])) if here.feasible[i] else (-math.inf, math.nan)
    cap_b = inst.budgets[i]
    for t in _candidate_multipliers(inst, z, a, i, np.asarray(grid, dtype=float)):
        a[i] = t
        out = clear(inst, a[:, None] * inst.values, z, mechanism)
        val = float(received_values(inst, out.winners)[i])
        spend = float(out.payments[i].sum())
        cap = min(val, cap_b)
        if spend <= cap + tol * max(1.0, cap) and val > best_val:
            best_val, best_a = val, float(t)
    return BestResponse(i, cur_val, best_val, best_a, bool(here.feasible[i]))


def certify_best_responses(inst: ProblemInstance, mechanism: str, boosts, alpha,
                           grid=DEFAULT_BR_GRID, tol: float = CLASSIFY_TOL) -> tuple:
    """``(certified, responses)``: certified when the profile is feasible and no
    bidder has a feasible single-multiplier deviation that gains value."""
    responses = [best_uniform_response(inst, mechanism, boosts, alpha, i, grid, tol)
                 for i in range(inst.num_bidders)]
    ok = all(r.current_feasible and not r.improves for r in responses)
    return ok, responses
