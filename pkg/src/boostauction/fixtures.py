"""Hand-built instances with known answers, and a replay that checks them.

* ``example_lower_bound``: two bidders, two single-slot auctions where a
  bidder with a tiny value can grab an auction by overbidding.  Boosted
  second-price auctions lose a factor ``(d + 1 + eps) / (d + 2)`` there.
* ``example_gsp``: GSP instance where non-uniform bidding beats every uniform
  multiplier (1.7 vs 1).
* ``example_fpa``: first-price instance where non-uniform bidding gets
  bidder 1 value 5 instead of 4.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .auction import FPA, GSP, VCG, clear, received_values
from .bidder import best_uniform_response, certify_best_responses, classify_profile, uniform_bids
from .boosts import uniform_boosts
from .instance import ProblemInstance
from .metrics import liquid_welfare, optimal_welfare_no_budget, revenue

FIXTURE_TOL = 1e-12


def example_lower_bound(d: float = 1.0, eps: float = 0.1) -> ProblemInstance:
    return ProblemInstance([[1 + d, eps], [0.0, 1.0]], [1, 1], [[1.0], [1.0]])


def lower_bound_profile(c: float = 0.0, eps: float = 0.1) -> np.ndarray:
    """Bidder 1 overbids past ``(1 + c) / eps`` and takes both auctions."""
    return np.array([(1 + c) / eps + 1, 1.0])


def example_gsp() -> ProblemInstance:
    return ProblemInstance([[1.0, 0.8], [0.9, 0.0], [0.0, 1.0]], [2, 1], [[1.0, 0.9], [1.0]])


GSP_NON_UNIFORM_BIDS = np.array([[0.01, 1.0], [0.9, 0.0], [0.0, 1.0]])


def example_fpa() -> ProblemInstance:
    return ProblemInstance([[4.0, 1.0], [1.0, 2.0]], [1, 1], [[1.0], [1.0]])


FPA_NON_UNIFORM_BIDS = np.array([[2.0, 3.0], [1.0, 2.0]])


@dataclass(frozen=True)
class FixtureCheck:
    fixture: str
    quantity: str
    expected: float
    observed: float
    tol: float = FIXTURE_TOL
    # "eq" (|observed - expected| <= tol) or "gt" (observed > expected)
    kind: str = "eq"

    @property
    def passed(self) -> bool:
        if self.kind == "gt":
            return self.observed > self.expected
        return abs(self.observed - self.expected) <= self.tol

    def line(self) -> str:
        rel = "=" if self.kind == "eq" else ">"
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.fixture:<17} {self.quantity:<42} "
                f"observed {self.observed:.12g} {rel} expected {self.expected:.12g}")


@dataclass
class FixtureReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def format(self) -> str:
        return "\n".join(c.line() for c in self.checks) + "\n"

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": [
            {"fixture": c.fixture, "quantity": c.quantity, "expected": c.expected,
             "observed": c.observed, "kind": c.kind, "passed": c.passed}
            for c in self.checks]}


def _lower_bound_checks(d: float, eps: float, c: float) -> list:
    name = f"lower-bound(c={c:g})"
    inst = example_lower_bound(d, eps)
    boosts = uniform_boosts(inst, c)
    alpha = lower_bound_profile(c, eps)
    opt, _ = optimal_welfare_no_budget(inst)
    cls = classify_profile(inst, VCG, boosts, alpha)
    wel = liquid_welfare(inst, cls.outcome)
    out = [
        FixtureCheck(name, "optimal welfare", d + 2, opt),
        FixtureCheck(name, "bidder 1 wins both auctions",
                     1.0, float((cls.outcome.winners[:, 0] == 0).all())),
        FixtureCheck(name, "welfare at overbidding profile", d + 1 + eps, wel),
        FixtureCheck(name, "ratio", (d + 1 + eps) / (d + 2), wel / opt),
        FixtureCheck(name, "profile in Theta", 1.0, float(cls.in_theta)),
    ]
    if c == 0:
        out.append(FixtureCheck(name, "revenue", 1.0, revenue(cls.outcome)))
        out.append(FixtureCheck(name, "bidder 1 spend", 1.0, float(cls.ledger.spend[0])))

    # Bidder 2's cheapest way into auction 2: just above bidder 1's score.
    z = boosts.z
    threshold = alpha[0] * eps + z[0, 1] - z[1, 1]
    dev = alpha.copy()
    dev[1] = threshold * (1 + 1e-9)
    pay = float(clear(inst, uniform_bids(inst, dev), z, VCG).payments[1].sum())
    out.append(FixtureCheck(name, "bidder 2 deviation payment > value 1", 1.0, pay, kind="gt"))
    nash, _ = certify_best_responses(inst, VCG, boosts, alpha)
    out.append(FixtureCheck(name, "profile is a Nash equilibrium", 1.0, float(nash)))
    return out


def _gsp_checks() -> list:
    name = "gsp"
    inst = example_gsp()
    others = np.ones(3)
    br = best_uniform_response(inst, GSP, None, others, 0)
    high = others.copy()
    high[0] = 1.25
    out_high = clear(inst, uniform_bids(inst, high), None, GSP)
    out_nu = clear(inst, GSP_NON_UNIFORM_BIDS, None, GSP)
    return [
        FixtureCheck(name, "best uniform value of bidder 1", 1.0, br.best_value),
        FixtureCheck(name, "alpha1=1.25 spend", 1.9, float(out_high.payments[0].sum())),
        FixtureCheck(name, "alpha1=1.25 value", 1.8, float(received_values(inst, out_high)[0])),
        FixtureCheck(name, "non-uniform value of bidder 1", 1.7,
                     float(received_values(inst, out_nu)[0])),
        FixtureCheck(name, "non-uniform payment of bidder 1", 1.0,
                     float(out_nu.payments[0].sum())),
        FixtureCheck(name, "non-uniform slot of bidder 1 in auction 1", 2.0,
                     float(out_nu.slot_of(0, 0) + 1)),
    ]


def _fpa_checks() -> list:
    name = "fpa"
    inst = example_fpa()
    ones = np.ones(2)
    out_u = clear(inst, uniform_bids(inst, ones), None, FPA)
    vals = received_values(inst, out_u)
    nash, _ = certify_best_responses(inst, FPA, None, ones)
    out_nu = clear(inst, FPA_NON_UNIFORM_BIDS, None, FPA)
    # bidder 2 needs to outbid bidder 1's non-uniform bids to win anything
    cheapest = [FPA_NON_UNIFORM_BIDS[0, j] - inst.values[1, j] for j in range(2)]
    return [
        FixtureCheck(name, "uniform value of bidder 1", 4.0, float(vals[0])),
        FixtureCheck(name, "uniform value of bidder 2", 2.0, float(vals[1])),
        FixtureCheck(name, "alpha=1 is a Nash equilibrium", 1.0, float(nash)),
        FixtureCheck(name, "non-uniform value of bidder 1", 5.0,
                     float(received_values(inst, out_nu)[0])),
        FixtureCheck(name, "non-uniform payment of bidder 1", 5.0,
                     float(out_nu.payments[0].sum())),
        FixtureCheck(name, "bidder 2 min overpay to deviate", 0.0, float(min(cheapest)), kind="gt"),
    ]


def replay_examples(d: float = 1.0, eps: float = 0.1, weights=(0.0, 1.0)) -> FixtureReport:
    """Run every fixture and compare against its known numbers."""
    checks = []
    for c in weights:
        checks += _lower_bound_checks(d, eps, c)
    checks += _gsp_checks()
    checks += _fpa_checks()
    return FixtureReport(checks)
