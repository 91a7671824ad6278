"""Problem instances, validation, synthetic generation and benchmark budgets.

An instance holds ``n`` bidders and ``m`` position auctions.  Auction ``j`` has
``slots[j]`` slots with position weights ``pos[j]`` (non-increasing).  Bidder
``i`` values slot ``k`` of auction ``j`` at ``values[i, j] * pos[j][k]``.
Budgets use ``math.inf`` for "unbounded".
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

UNBOUNDED = math.inf


class InvalidInstanceError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    values: np.ndarray
    slots: np.ndarray
    pos: tuple
    budgets: np.ndarray = None
    seller_costs: np.ndarray = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=2)
        n, m = values.shape
        slots = np.array(self.slots, dtype=int).reshape(-1)
        pos = tuple(_frozen(np.array(p, dtype=float).reshape(-1)) for p in self.pos)
        if self.budgets is None:
            budgets = np.full(n, UNBOUNDED)
        else:
            budgets = np.array(
                [UNBOUNDED if b is None else b for b in self.budgets], dtype=float
            ).reshape(-1)
        if self.seller_costs is None:
            costs = np.zeros_like(values)
        else:
            costs = np.array(self.seller_costs, dtype=float, ndmin=2)
        for name, arr in (("values", values), ("slots", slots),
                          ("budgets", budgets), ("seller_costs", costs)):
            object.__setattr__(self, name, _frozen(arr))
        object.__setattr__(self, "pos", pos)

    @property
    def num_bidders(self) -> int:
        return self.values.shape[0]

    @property
    def num_auctions(self) -> int:
        return self.values.shape[1]

    @property
    def max_slots(self) -> int:
        return int(self.slots.max()) if self.slots.size else 0

    @property
    def has_budgets(self) -> bool:
        return bool(np.isfinite(self.budgets).any())

    @cached_property
    def pos_matrix(self) -> np.ndarray:
        """Position weights padded with zeros to shape ``(m, max_slots + 1)``.

        The extra trailing column is the ``pos_{j, s_j + 1} = 0`` convention
        used by the VCG payment rule.
        """
        out = np.zeros((self.num_auctions, self.max_slots + 1))
        for j, p in enumerate(self.pos):
            out[j, : len(p)] = p
        return _frozen(out)

    def with_budgets(self, budgets) -> "ProblemInstance":
        return ProblemInstance(self.values, self.slots, self.pos, budgets, self.seller_costs)

    def with_seller_costs(self, costs) -> "ProblemInstance":
        return ProblemInstance(self.values, self.slots, self.pos, self.budgets, costs)

    def check(self) -> None:
        """Raise :class:`InvalidInstanceError` listing every violated invariant."""
        report = validate_instance(self)
        if not report.ok:
            raise InvalidInstanceError("; ".join(report.violations))


@dataclass(frozen=True, eq=False)
class BenchmarkOrder:
    """Per-auction ranking: ``ranks[j, k]`` is the bidder placed at rank ``k``."""

    ranks: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ranks", _frozen(np.array(self.ranks, dtype=int, ndmin=2)))

    def check(self, inst: ProblemInstance | None = None) -> None:
        m, n = self.ranks.shape
        if inst is not None and (m, n) != (inst.num_auctions, inst.num_bidders):
            raise ValueError(
                f"benchmark order has shape {(m, n)}, instance needs "
                f"{(inst.num_auctions, inst.num_bidders)}"
            )
        want = np.arange(n)
        for j in range(m):
            if not np.array_equal(np.sort(self.ranks[j]), want):
                raise ValueError(f"benchmark order for auction {j} is not a permutation")

    def rank_of(self) -> np.ndarray:
        """Inverse permutation, shape ``(m, n)``: rank of each bidder per auction."""
        m, n = self.ranks.shape
        inv = np.empty_like(self.ranks)
        inv[np.arange(m)[:, None], self.ranks] = np.arange(n)[None, :]
        return inv


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_instance(inst: ProblemInstance) -> ValidationReport:
    """Collect violated instance invariants; indices in messages are 1-based."""
    out = []
    n, m = inst.values.shape
    if inst.slots.shape != (m,):
        out.append(f"slots has length {inst.slots.size}, expected m={m}")
    if len(inst.pos) != m:
        out.append(f"pos has {len(inst.pos)} rows, expected m={m}")
    if inst.budgets.shape != (n,):
        out.append(f"budgets has length {inst.budgets.size}, expected n={n}")
    if inst.seller_costs.shape != (n, m):
        out.append(f"seller_costs has shape {inst.seller_costs.shape}, expected {(n, m)}")

    for j in range(min(m, len(inst.pos), inst.slots.size)):
        p = inst.pos[j]
        if inst.slots[j] < 1:
            out.append(f"slot count < 1 at j={j + 1}")
        if p.size != inst.slots[j]:
            out.append(f"pos length {p.size} != slots {inst.slots[j]} at j={j + 1}")
        for k in range(p.size):
            if not p[k] > 0:
                out.append(f"non-positive pos at (j={j + 1},k={k + 1})")
            if k > 0 and p[k] > p[k - 1]:
                out.append(f"pos increasing at (j={j + 1},k={k + 1})")

    for i, j in zip(*np.nonzero(~(inst.values >= 0))):
        out.append(f"negative value at (i={i + 1},j={j + 1})")
    for i in np.nonzero(~(inst.budgets > 0))[0]:
        out.append(f"non-positive budget at i={i + 1}")
    if inst.seller_costs.shape == (n, m):
        for i, j in zip(*np.nonzero(~(inst.seller_costs >= 0))):
            out.append(f"negative seller cost at (i={i + 1},j={j + 1})")
    return ValidationReport(out)


# --------------------------------------------------------------------------
# generation


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for :func:`generate_instance`.

    Values are ``exp(value_loc + shift_i + value_sigma * N(0, 1))`` where
    ``shift_i ~ N(0, bidder_shift_sigma)`` is a per-bidder location shift.
    Each (bidder, auction) pair is active with probability ``participation``;
    inactive pairs get value 0.  ``rho``, ``mu_lo`` and ``mu_hi`` are consumed
    by :func:`assign_budgets_via_benchmark`.
    """

    n: int = 5
    m: int = 20
    slots_min: int = 1
    slots_max: int = 3
    value_loc: float = 0.0
    value_sigma: float = 1.0
    bidder_shift_sigma: float = 0.0
    participation: float = 1.0
    decay: float = 0.9
    rho: float = 0.5
    mu_lo: float = 0.1
    mu_hi: float = 0.9
    seed: int = 0

    def check(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if not 1 <= self.slots_min <= self.slots_max:
            raise ValueError("need 1 <= slots_min <= slots_max")
        if self.value_sigma < 0 or self.bidder_shift_sigma < 0:
            raise ValueError("scale parameters must be non-negative")
        if not 0 < self.participation <= 1:
            raise ValueError("participation must be in (0, 1]")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")
        if not 0 <= self.rho <= 1:
            raise ValueError("rho must be in [0, 1]")
        if not 0 < self.mu_lo < self.mu_hi < 1:
            raise ValueError("need 0 < mu_lo < mu_hi < 1")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def generate_instance(params: GeneratorParams) -> ProblemInstance:
    """Draw an unbudgeted instance; the same params always give the same instance."""
    params.check()
    rng = np.random.default_rng(params.seed)
    n, m = params.n, params.m
    slots = rng.integers(params.slots_min, params.slots_max + 1, size=m)
    shift = rng.normal(0.0, params.bidder_shift_sigma, size=n) if params.bidder_shift_sigma else np.zeros(n)
    noise = rng.standard_normal((n, m))
    values = np.exp(params.value_loc + shift[:, None] + params.value_sigma * noise)
    if params.participation < 1:
        values = np.where(rng.random((n, m)) < params.participation, values, 0.0)
    pos = [params.decay ** np.arange(s) for s in slots]
    return ProblemInstance(values, slots, pos)


def benchmark_order_from_scores(scores: np.ndarray) -> BenchmarkOrder:
    """Rank bidders per auction by ``scores[i, j]`` descending, ties to the lower index."""
    n, m = scores.shape
    idx = np.arange(n)
    return BenchmarkOrder(np.stack([np.lexsort((idx, -scores[:, j])) for j in range(m)]))


def benchmark_allocated_values(inst: ProblemInstance, order: BenchmarkOrder) -> np.ndarray:
    """Per-bidder value received when slot k of auction j goes to ``order.ranks[j, k]``."""
    n = inst.num_bidders
    out = np.zeros(n)
    for j, p in enumerate(inst.pos):
        top = order.ranks[j, : min(n, p.size)]
        out[top] += inst.values[top, j] * p[: top.size]
    return out


@dataclass(frozen=True, eq=False)
class BenchmarkAugmentation:
    instance: ProblemInstance
    order: BenchmarkOrder
    mu: np.ndarray
    constrained: np.ndarray  # bool mask


def assign_budgets_via_benchmark(
    inst: ProblemInstance,
    rho: float,
    mu_range: tuple = (0.1, 0.9),
    seed: int = 0,
) -> BenchmarkAugmentation:
    """Mark a random ``rho`` fraction of bidders as budget constrained.

    Constrained bidders draw ``mu_i ~ U(mu_range)``, everyone else has
    ``mu_i = 1``.  Auctions rank bidders by ``mu_i * v_ij`` and a constrained
    bidder's budget is the value it receives under that ranking, which makes
    the ranking welfare-optimal for the returned instance.

    A constrained bidder whose benchmark value comes out as zero is released
    (``mu_i = 1``, unbounded) and the ranking recomputed, since budgets must
    stay positive.
    """
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    lo, hi = mu_range
    if not 0 < lo < hi < 1:
        raise ValueError("mu_range must satisfy 0 < lo < hi < 1")
    n = inst.num_bidders
    rng = np.random.default_rng(seed)
    k = int(round(rho * n))
    constrained = np.zeros(n, dtype=bool)
    constrained[rng.choice(n, size=k, replace=False)] = True
    draws = rng.uniform(lo, hi, size=n)

    while True:
        mu = np.where(constrained, draws, 1.0)
        order = benchmark_order_from_scores(mu[:, None] * inst.values)
        got = benchmark_allocated_values(inst, order)
        starved = constrained & ~(got > 0)
        if not starved.any():
            break
        constrained &= ~starved

    budgets = np.where(constrained, got, UNBOUNDED)
    return BenchmarkAugmentation(inst.with_budgets(budgets), order, mu, constrained)


# --------------------------------------------------------------------------
# JSON interchange


def _budget_list(budgets: np.ndarray) -> list:
    return [None if math.isinf(b) else float(b) for b in budgets]


def instance_to_dict(inst: ProblemInstance, order: BenchmarkOrder | None = None,
                     mu: Sequence | None = None, boosts=None) -> dict:
    doc = {
        "n": inst.num_bidders,
        "m": inst.num_auctions,
        "slots": [int(s) for s in inst.slots],
        "values": inst.values.tolist(),
        "pos": [p.tolist() for p in inst.pos],
        "budgets": _budget_list(inst.budgets),
        "seller_costs": inst.seller_costs.tolist(),
    }
    if order is not None:
        doc["benchmark"] = order.ranks.tolist()
    if mu is not None:
        doc["mu"] = [float(x) for x in mu]
    if boosts is not None:
        doc["boosts"] = boosts.to_dict()
    return doc


@dataclass(frozen=True, eq=False)
class InstanceRecord:
    instance: ProblemInstance
    order: BenchmarkOrder | None = None
    mu: np.ndarray | None = None
    boosts: object = None


def instance_from_dict(doc: dict) -> InstanceRecord:
    try:
        inst = ProblemInstance(
            doc["values"], doc["slots"], doc["pos"],
            doc.get("budgets"), doc.get("seller_costs"),
        )
    except KeyError as exc:
        raise InvalidInstanceError(f"instance document missing field {exc}") from None
    if inst.values.shape != (doc.get("n", inst.num_bidders), doc.get("m", inst.num_auctions)):
        raise InvalidInstanceError("n/m fields disagree with the values matrix")
    order = BenchmarkOrder(doc["benchmark"]) if doc.get("benchmark") is not None else None
    mu = np.asarray(doc["mu"], dtype=float) if doc.get("mu") is not None else None
    boosts = None
    if doc.get("boosts") is not None:
        from .boosts import BoostMatrix

        boosts = BoostMatrix.from_dict(doc["boosts"])
    return InstanceRecord(inst, order, mu, boosts)


def save_instance(path, inst: ProblemInstance, **extra) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst, **extra), indent=1))


def load_instance(path) -> InstanceRecord:
    return instance_from_dict(json.loads(Path(path).read_text()))
