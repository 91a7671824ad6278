"""Randomised property sweeps for the welfare guarantees.

Each suite draws small random instances from a seeded generator, samples
multiplier profiles inside Theta by rejection, and checks a ratio bound with
:func:`~boostauction.metrics.check_ratio_bound`.  Results carry sample counts,
the smallest slack seen and a bundle for every violation.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .auction import FPA, GSP, VCG, clear
from .bidder import LearningRate, certify_best_responses, classify_profile, uniform_bids
from .boosts import CUSTOM, BoostMatrix, benchmark_boosts, uniform_boosts
from .fixtures import replay_examples
from .instance import GeneratorParams, ProblemInstance, assign_budgets_via_benchmark, generate_instance
from .metrics import (FAIL, PASS, benchmark_welfare, check_ratio_bound, enumeration_size,
                      liquid_welfare, optimal_liquid_welfare_bruteforce,
                      optimal_welfare_no_budget, sandwich_ratio)
from .simulator import ExperimentConfig, run_dynamics

WEIGHTS = (0.0, 0.3, 0.6, 1.0, 2.0)
EQ_TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    samples: int = 0
    checked: int = 0
    skipped: int = 0
    min_slack: float | None = None
    violations: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def note_slack(self, slack: float) -> None:
        if self.min_slack is None or slack < self.min_slack:
            self.min_slack = float(slack)

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "samples": self.samples,
                "checked": self.checked, "skipped": self.skipped, "min_slack": self.min_slack,
                "violations": self.violations, "extra": self.extra}

    def line(self) -> str:
        slack = "n/a" if self.min_slack is None else f"{self.min_slack:.6g}"
        return (f"{'PASS' if self.ok else 'FAIL'}  {self.name:<15} samples={self.samples} "
                f"checked={self.checked} skipped={self.skipped} min_slack={slack} "
                f"violations={len(self.violations)}")


# --------------------------------------------------------------------------
# samplers


def random_instance(rng: np.random.Generator, n_max: int = 5, m_max: int = 6,
                    s_max: int = 3) -> ProblemInstance:
    """Small unbudgeted instance with lognormal values, some zeros and some ties."""
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    slots = rng.integers(1, s_max + 1, size=m)
    pos = [np.sort(rng.uniform(0.1, 1.0, size=s))[::-1] for s in slots]
    v = rng.lognormal(0.0, 1.0, size=(n, m))
    v[rng.random((n, m)) < 0.15] = 0.0
    if rng.random() < 0.3:
        v = np.round(v, 1)
    return ProblemInstance(v, slots, pos)


def random_value_competitive_boosts(inst: ProblemInstance, c: float,
                                    rng: np.random.Generator) -> BoostMatrix:
    """``c * v`` half the time, otherwise ``c * v`` plus a per-auction increasing term."""
    if rng.random() < 0.5:
        return uniform_boosts(inst, c)
    v = inst.values
    kappa = rng.uniform(0.0, 1.0, size=v.shape[1])
    power = rng.uniform(0.5, 2.0, size=v.shape[1])
    return BoostMatrix(c * v + kappa * v ** power, CUSTOM, c)


def sample_theta_profile(inst: ProblemInstance, mechanism: str, boosts, rng: np.random.Generator,
                         alpha_hi: float = 4.0, tries: int = 20):
    """Multipliers log-uniform on ``[1, alpha_hi]``, kept only if the profile is in Theta."""
    n = inst.num_bidders
    for _ in range(tries):
        hi = math.log(alpha_hi) * rng.random()
        alpha = np.exp(rng.uniform(0.0, hi, size=n))
        if classify_profile(inst, mechanism, boosts, alpha).in_theta:
            return alpha
    return None


def _close(a: float, b: float, tol: float = EQ_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _record_check(res: SuiteResult, chk, c: float) -> None:
    if chk.status == PASS:
        res.checked += 1
        res.note_slack(chk.slack)
    elif chk.status == FAIL:
        res.checked += 1
        res.note_slack(chk.slack)
        res.violations.append({"c": c, **chk.to_dict()})
    else:
        res.skipped += 1


# --------------------------------------------------------------------------
# suites


def suite_fixtures(samples: int = 0, seed: int = 0) -> SuiteResult:
    t0 = time.perf_counter()
    rep = replay_examples()
    res = SuiteResult("fixtures", samples=len(rep.checks), checked=len(rep.checks))
    res.violations = [f.line() for f in rep.failures()]
    res.extra["checks"] = [c.line() for c in rep.checks]
    res.seconds = time.perf_counter() - t0
    return res


def suite_value_boost(samples: int = 1000, seed: int = 0, weights=WEIGHTS,
                      brute_force: int = 100, size_cap: int = 50_000) -> SuiteResult:
    """VCG with c-value-competitive boosts against the unbudgeted optimum.

    The greedy optimum is cross-checked by enumeration on the first
    ``brute_force`` enumerable samples.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    res = SuiteResult("value_boost")
    crossed = 0
    for k in range(samples):
        inst = random_instance(rng)
        c = float(weights[k % len(weights)])
        boosts = random_value_competitive_boosts(inst, c, rng)
        res.samples += 1
        if crossed < brute_force and enumeration_size(inst) <= size_cap:
            greedy, _ = optimal_welfare_no_budget(inst)
            brute = optimal_liquid_welfare_bruteforce(inst, size_cap)
            crossed += 1
            if not _close(greedy, brute):
                res.violations.append({"oracle_mismatch": [greedy, brute], "sample": k})
        alpha = sample_theta_profile(inst, VCG, boosts, rng)
        if alpha is None:
            res.skipped += 1
            continue
        _record_check(res, check_ratio_bound(inst, VCG, boosts, alpha, "opt", c=c), c)
    res.extra["oracle_cross_checks"] = crossed
    res.seconds = time.perf_counter() - t0
    return res


def random_budgeted_instance(rng: np.random.Generator, n_max: int = 5, m_max: int = 6,
                             s_max: int = 3):
    """Generated instance with budgets induced by a random benchmark order."""
    params = GeneratorParams(n=int(rng.integers(2, n_max + 1)), m=int(rng.integers(1, m_max + 1)),
                             slots_min=1, slots_max=s_max, rho=float(rng.uniform(0.2, 1.0)),
                             decay=float(rng.uniform(0.5, 1.0)),
                             seed=int(rng.integers(2**31)))
    return assign_budgets_via_benchmark(generate_instance(params), params.rho,
                                        (params.mu_lo, params.mu_hi), seed=int(rng.integers(2**31)))


def suite_benchmark_boost(samples: int = 1000, seed: int = 0, weights=WEIGHTS,
                          size_cap: int = 50_000) -> SuiteResult:
    """VCG with benchmark boosts on budgeted instances against ``Wel(o)``."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    res = SuiteResult("benchmark_boost")
    crossed = 0
    for k in range(samples):
        aug = random_budgeted_instance(rng)
        inst, order = aug.instance, aug.order
        c = float(weights[k % len(weights)])
        res.samples += 1
        if enumeration_size(inst) <= size_cap:
            bench = benchmark_welfare(inst, order)
            brute = optimal_liquid_welfare_bruteforce(inst, size_cap)
            crossed += 1
            if not _close(bench, brute):
                res.violations.append({"benchmark_not_optimal": [bench, brute], "sample": k})
        boosts = benchmark_boosts(inst, order, c)
        alpha = sample_theta_profile(inst, VCG, boosts, rng)
        if alpha is None:
            res.skipped += 1
            continue
        _record_check(res, check_ratio_bound(inst, VCG, boosts, alpha, order, c=c), c)
    res.extra["benchmark_cross_checks"] = crossed
    res.seconds = time.perf_counter() - t0
    return res


def _wide_instance(rng: np.random.Generator, m: int, s_max: int = 3) -> ProblemInstance:
    n = int(rng.integers(2, 6))
    slots = rng.integers(1, s_max + 1, size=m)
    raw = np.sort(rng.uniform(0.1, 1.0, size=(m, s_max)), axis=1)[:, ::-1]
    pos = [raw[j, :s] for j, s in enumerate(slots)]
    return ProblemInstance(rng.lognormal(0.0, 1.0, size=(n, m)), slots, pos)


def payment_sandwich(inst: ProblemInstance, bids, boosts) -> tuple:
    """``(clearings, violations)``: each winner's VCG payment <= GSP payment <= bid * pos."""
    vcg = clear(inst, bids, boosts, VCG)
    gsp = clear(inst, bids, boosts, GSP)
    filled = gsp.winners >= 0
    j, k = np.nonzero(filled)
    i = gsp.winners[j, k]
    pv, pg = vcg.payments[i, j], gsp.payments[i, j]
    cap = np.asarray(bids)[i, j] * inst.pos_matrix[j, k]
    slack = EQ_TOL * np.maximum(1.0, cap)
    bad = (pv > pg + slack) | (pg > cap + slack)
    return inst.num_auctions, [
        {"auction": int(a), "slot": int(b), "bidder": int(c), "vcg": float(x), "gsp": float(y),
         "bid_pos": float(z)}
        for a, b, c, x, y, z in zip(j[bad], k[bad], i[bad], pv[bad], pg[bad], cap[bad])]


def suite_sandwich(samples: int = 1000, seed: int = 0, weights=WEIGHTS,
                   clearings: int = 100_000, width: int = 2000) -> SuiteResult:
    """Payment sandwich on wide random instances, then the GSP ratio sweep.

    ``samples`` counts GSP ratio samples; ``clearings`` counts single-auction
    clearings for the payment check, batched ``width`` auctions at a time.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    res = SuiteResult("sandwich")
    done = 0
    while done < clearings:
        inst = _wide_instance(rng, min(width, clearings - done))
        c = float(rng.choice(weights))
        boosts = random_value_competitive_boosts(inst, c, rng)
        alpha = np.exp(rng.uniform(-1.0, 2.0, size=inst.num_bidders))
        count, bad = payment_sandwich(inst, uniform_bids(inst, alpha), boosts.z)
        done += count
        res.violations.extend(bad)
    res.extra["clearings"] = done

    for k in range(samples):
        inst = random_instance(rng)
        c = float(weights[k % len(weights)])
        boosts = random_value_competitive_boosts(inst, c, rng)
        res.samples += 1
        alpha = sample_theta_profile(inst, GSP, boosts, rng)
        if alpha is None:
            res.skipped += 1
            continue
        gamma = float(alpha.min())
        chk = check_ratio_bound(inst, GSP, boosts, alpha, "opt",
                                ratio=sandwich_ratio(c, gamma), c=c)
        _record_check(res, chk, c)
    res.seconds = time.perf_counter() - t0
    return res


def fpa_config(iters: int = 400, eta: float = 0.5, spread: float = 1.0, seed: int = 0,
               tol: float = 1e-9) -> ExperimentConfig:
    return ExperimentConfig(mechanism="fpa", pretrain_iters=iters, boosted_iters=0,
                            eta=LearningRate(eta, 0, decay=False), initial_spread=spread,
                            tol=tol, early_stop=True, seed=seed)


def suite_fpa(samples: int = 200, seed: int = 0, iters: int = 400, eta: float = 0.5,
              rel_tol: float = 1e-6) -> SuiteResult:
    """First-price dynamics; certified fixed points must reach the optimum."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    res = SuiteResult("fpa")
    uncertified = []
    not_converged = 0
    for k in range(samples):
        inst = random_instance(rng)
        res.samples += 1
        trace = run_dynamics(inst, fpa_config(iters, eta, seed=int(rng.integers(2**31))))
        alpha = trace.final.alpha
        if not trace.converged:
            not_converged += 1
        ok, _ = certify_best_responses(inst, FPA, None, alpha)
        if not (trace.converged and ok):
            uncertified.append(k)
            res.skipped += 1
            continue
        opt, _ = optimal_welfare_no_budget(inst)
        wel = liquid_welfare(inst, clear(inst, uniform_bids(inst, alpha), None, FPA))
        res.checked += 1
        gap = (wel - opt) / opt if opt > 0 else 0.0
        res.note_slack(gap + rel_tol)
        if abs(gap) > rel_tol:
            res.violations.append({"sample": k, "welfare": wel, "optimal": opt,
                                   "alpha": alpha.tolist()})
    res.extra["uncertified"] = uncertified
    res.extra["not_converged"] = not_converged
    res.seconds = time.perf_counter() - t0
    return res


SUITES = {
    "fixtures": suite_fixtures,
    "value_boost": suite_value_boost,
    "benchmark_boost": suite_benchmark_boost,
    "sandwich": suite_sandwich,
    "fpa": suite_fpa,
}


def run_suites(names, samples: int, seed: int) -> list:
    out = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        out.append(SUITES[name](samples, seed))
    return out
