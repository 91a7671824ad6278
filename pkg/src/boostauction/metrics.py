"""Welfare and revenue accounting, optimum oracles and ratio-bound checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .auction import AuctionOutcome, received_values
from .bidder import classify_profile
from .boosts import BoostMatrix, is_benchmark_competitive, is_value_competitive
from .instance import BenchmarkOrder, ProblemInstance, benchmark_allocated_values, instance_to_dict

RATIO_TOL = 1e-9
DEFAULT_SIZE_CAP = 500_000


def _winners(x) -> np.ndarray:
    if isinstance(x, AuctionOutcome):
        return x.winners
    x = np.asarray(x)
    if x.ndim == 3:  # dense x[i, j, k]
        _, m, s = x.shape
        w = np.full((m, s), -1)
        i, j, k = np.nonzero(x)
        w[j, k] = i
        return w
    return x


def liquid_welfare(inst: ProblemInstance, x) -> float:
    """Sum over bidders of ``min(B_i, value received)``.

    ``x`` may be an AuctionOutcome, a winners array ``(m, S)`` or a dense
    0/1 assignment ``(n, m, S)``.
    """
    got = received_values(inst, _winners(x))
    return float(np.minimum(inst.budgets, got).sum())


def revenue(outcome: AuctionOutcome) -> float:
    return float(outcome.payments.sum())


def approx_ratio(c: float) -> float:
    """The ``(c + 1) / (c + 2)`` guarantee of boosted VCG."""
    return (c + 1) / (c + 2)


def sandwich_ratio(c: float, gamma: float) -> float:
    """Guarantee ``(c + gamma) / (c + gamma + 1)`` under minimum bidding level ``gamma``."""
    return (c + gamma) / (c + gamma + 1)


def optimal_welfare_no_budget(inst: ProblemInstance) -> tuple:
    """``(Wel^OPT, winners)`` for an unbudgeted instance.

    Each auction gives its k-th slot to the k-th highest value; this is optimal
    because position weights are non-increasing.
    """
    if inst.has_budgets:
        raise ValueError("optimal_welfare_no_budget needs an instance without budgets")
    n, m = inst.values.shape
    winners = np.full((m, inst.max_slots), -1)
    idx = np.arange(n)
    total = 0.0
    for j, p in enumerate(inst.pos):
        top = np.lexsort((idx, -inst.values[:, j]))[: min(n, p.size)]
        winners[j, : top.size] = top
        total += float(inst.values[top, j] @ p[: top.size])
    return total, winners


def enumeration_size(inst: ProblemInstance) -> int:
    n = inst.num_bidders
    return math.prod(math.perm(n, min(n, int(s))) for s in inst.slots)


def optimal_liquid_welfare_bruteforce(inst: ProblemInstance,
                                      size_cap: int = DEFAULT_SIZE_CAP) -> float:
    """Exact ``max_x Wel(x)`` by enumerating every slot assignment.

    Only assignments filling the top ``min(n, s_j)`` slots are listed; leaving
    a higher slot empty can never help since values are non-negative and
    position weights non-increasing.
    """
    size = enumeration_size(inst)
    if size > size_cap:
        raise ValueError(f"instance needs {size} assignments, cap is {size_cap}")
    n = inst.num_bidders
    acc = np.zeros((1, n))
    for j, p in enumerate(inst.pos):
        k = min(n, p.size)
        perms = np.array(list(permutations(range(n), k)), dtype=int).reshape(-1, k)
        contrib = np.zeros((perms.shape[0], n))
        rows = np.arange(perms.shape[0])[:, None]
        contrib[rows, perms] = inst.values[perms, j] * p[:k]
        acc = (acc[:, None, :] + contrib[None, :, :]).reshape(-1, n)
    return float(np.minimum(inst.budgets, acc).sum(axis=1).max())


def benchmark_welfare(inst: ProblemInstance, order: BenchmarkOrder) -> float:
    order.check(inst)
    return float(np.minimum(inst.budgets, benchmark_allocated_values(inst, order)).sum())


@dataclass(frozen=True, eq=False)
class WelfareReport:
    liquid_welfare: float
    revenue: float
    capped_values: np.ndarray
    optimal: float | None = None

    @property
    def ratio(self) -> float | None:
        if self.optimal is None or self.optimal <= 0:
            return None
        return self.liquid_welfare / self.optimal


def welfare_report(inst: ProblemInstance, outcome: AuctionOutcome,
                   optimal: float | None = None) -> WelfareReport:
    capped = np.minimum(inst.budgets, received_values(inst, outcome.winners))
    return WelfareReport(float(capped.sum()), revenue(outcome), capped, optimal)


PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass(eq=False)
class CheckResult:
    status: str
    bound: float
    observed: float | None = None
    welfare: float | None = None
    baseline: float | None = None
    reason: str = ""
    bundle: dict = field(default_factory=dict)

    @property
    def slack(self) -> float | None:
        return None if self.observed is None else self.observed - self.bound

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {"status": self.status, "bound": self.bound, "observed": self.observed,
                "slack": self.slack, "welfare": self.welfare, "baseline": self.baseline,
                "reason": self.reason, "bundle": self.bundle}


def check_ratio_bound(inst: ProblemInstance, mechanism: str, boosts: BoostMatrix | None,
                      alpha, baseline="opt", ratio: float | None = None,
                      c: float | None = None, tol: float = RATIO_TOL) -> CheckResult:
    """Check ``Wel(x(alpha)) / baseline >= ratio - tol``.

    ``baseline`` is ``"opt"`` (unbudgeted optimum; boosts must be
    c-value-competitive) or a :class:`BenchmarkOrder` (``Wel(o)``; boosts must
    be c-benchmark-competitive).  ``c`` defaults to the boost weight and
    ``ratio`` to ``(c + 1) / (c + 2)``.  Profiles outside Theta and boosts that
    fail their verifier come back as skips.
    """
    if c is None:
        c = boosts.c if boosts is not None and boosts.c is not None else 0.0
    bound = approx_ratio(c) if ratio is None else ratio
    z = boosts if boosts is not None else np.zeros_like(inst.values)

    if isinstance(baseline, BenchmarkOrder):
        verdict = is_benchmark_competitive(z, inst, baseline, c)
        if not verdict:
            return CheckResult(SKIP, bound, reason=f"boosts not {c}-benchmark-competitive at {verdict.witness}")
        base = benchmark_welfare(inst, baseline)
    elif baseline == "opt":
        if inst.has_budgets:
            return CheckResult(SKIP, bound, reason="opt baseline needs an unbudgeted instance")
        verdict = is_value_competitive(z, inst, c)
        if not verdict:
            return CheckResult(SKIP, bound, reason=f"boosts not {c}-value-competitive at {verdict.witness}")
        base, _ = optimal_welfare_no_budget(inst)
    else:
        raise ValueError(f"unknown baseline {baseline!r}")

    cls = classify_profile(inst, mechanism, z, alpha)
    if not cls.in_theta:
        return CheckResult(SKIP, bound, reason="multiplier profile not in Theta")

    wel = liquid_welfare(inst, cls.outcome)
    observed = wel / base if base > 0 else 1.0
    if observed >= bound - tol:
        return CheckResult(PASS, bound, observed, wel, base)
    bundle = {
        "instance": instance_to_dict(inst, baseline if isinstance(baseline, BenchmarkOrder) else None),
        "mechanism": mechanism,
        "alpha": np.asarray(alpha, dtype=float).tolist(),
        "boosts": np.asarray(getattr(z, "z", z)).tolist(),
        "outcome": cls.outcome.to_dict(),
    }
    return CheckResult(FAIL, bound, observed, wel, base, reason="ratio below bound", bundle=bundle)
