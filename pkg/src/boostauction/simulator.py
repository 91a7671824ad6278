"""Bid-multiplier dynamics: pre-train without boosts, then switch boosts on.

A run is a chain of iterations.  Each iteration clears every auction at the
current multipliers, logs welfare, revenue and bidder ledgers, then moves all
multipliers at once with :func:`~boostauction.bidder.update_multipliers`.
After the last iteration one more record (phase ``"final"``) logs the outcome
of the final multipliers, so a run of ``T`` iterations has ``T + 1`` records.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .auction import FPA, GSP, VCG, clear
from .bidder import (ALPHA_MAX, ALPHA_MIN, LOG_RATIO_CLAMP, LearningRate, classify_ledger,
                     ledger_from_outcome, uniform_bids, update_multipliers)
from .boosts import NONE, BoostMatrix, make_boosts, zero_boosts
from .instance import BenchmarkOrder, ProblemInstance
from .metrics import liquid_welfare, revenue

PRETRAIN, BOOSTED, FINAL = "pretrain", "boosted", "final"

# Bidders always bid uniformly here, so the "uniform-enforced" variants are
# the plain mechanisms.
MECHANISM_ALIASES = {
    "vcg": VCG,
    "gsp": GSP,
    "gsp-uniform": GSP,
    "gsp-uniform-enforced": GSP,
    "fpa": FPA,
    "fpa-uniform": FPA,
    "fpa-uniform-enforced": FPA,
}


def resolve_mechanism(name: str) -> str:
    try:
        return MECHANISM_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown mechanism {name!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    mechanism: str = "vcg"
    scheme: str = NONE
    c: float = 0.0
    pretrain_iters: int = 25
    boosted_iters: int = 25
    eta: LearningRate = field(default_factory=LearningRate)
    clamp: float = LOG_RATIO_CLAMP
    alpha_min: float = ALPHA_MIN
    alpha_max: float = ALPHA_MAX
    initial_alpha: float = 1.0
    # half-width of a log-uniform jitter around initial_alpha, drawn from seed
    initial_spread: float = 0.0
    tol: float = 1e-4
    window: int = 3
    early_stop: bool = False
    # count learning-rate steps from 1 again when the boosts switch on
    restart_schedule: bool = True
    # converged metrics average this many trailing records
    summary_window: int = 5
    seed: int = 0

    def check(self) -> None:
        resolve_mechanism(self.mechanism)
        if self.pretrain_iters < 0 or self.boosted_iters < 0:
            raise ValueError("iteration counts must be non-negative")
        if not self.c >= 0:
            raise ValueError("boost weight must be non-negative")
        if not self.initial_alpha > 0 or self.initial_spread < 0:
            raise ValueError("bad initial multiplier settings")
        if self.window < 1 or not self.tol > 0 or self.summary_window < 1:
            raise ValueError("bad convergence settings")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        if isinstance(doc.get("eta"), dict):
            doc["eta"] = LearningRate(**doc["eta"])
        return cls(**doc)

    def initial_multipliers(self, n: int) -> np.ndarray:
        a = np.full(n, float(self.initial_alpha))
        if self.initial_spread > 0:
            rng = np.random.default_rng(self.seed)
            a *= np.exp(rng.uniform(-self.initial_spread, self.initial_spread, size=n))
        return a


@dataclass(frozen=True, eq=False)
class IterationRecord:
    iteration: int
    phase: str
    step: int
    alpha: np.ndarray
    value: np.ndarray
    spend: np.ndarray
    target: np.ndarray
    welfare: float
    revenue: float
    feasible: np.ndarray
    undominated: np.ndarray
    converged: bool

    @property
    def in_theta(self) -> bool:
        return bool(self.feasible.all() and self.undominated.all())


def detect_convergence(alphas, tol: float = 1e-4, window: int = 3) -> bool:
    """True when the last ``window`` log-multiplier steps all move less than ``tol``."""
    alphas = [np.asarray(a, dtype=float) for a in alphas]
    if len(alphas) < 2:
        raise ValueError("need at least two multiplier vectors")
    if len(alphas) < window + 1:
        return False
    logs = np.log(np.stack(alphas[-(window + 1):]))
    return bool((np.abs(np.diff(logs, axis=0)).max(axis=1) < tol).all())


def _record(inst, mechanism, z, alpha, iteration, phase, step, converged) -> IterationRecord:
    outcome = clear(inst, uniform_bids(inst, alpha), z, mechanism)
    ledger = ledger_from_outcome(inst, outcome)
    feasible, undominated = classify_ledger(inst, alpha, ledger)
    rec = IterationRecord(iteration, phase, step, alpha.copy(), ledger.value, ledger.spend,
                          ledger.target, liquid_welfare(inst, outcome), revenue(outcome),
                          feasible, undominated, converged)
    return rec, ledger


def _run_phase(inst, config, mechanism, z, alpha, iters, phase, start, converged=False):
    records = []
    history = [alpha]
    for step in range(1, iters + 1):
        rec, ledger = _record(inst, mechanism, z, alpha, start + step - 1, phase, step, converged)
        records.append(rec)
        t = step if config.restart_schedule else start + step
        alpha = update_multipliers(alpha, ledger, config.eta(t), config.clamp,
                                   config.alpha_min, config.alpha_max)
        history.append(alpha)
        converged = detect_convergence(history, config.tol, config.window)
        if converged and config.early_stop:
            break
    return records, alpha, converged


@dataclass(eq=False)
class SimulationTrace:
    label: str
    records: list
    boosts: BoostMatrix | None = None
    config: ExperimentConfig | None = None

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    def phase(self, name: str) -> list:
        return [r for r in self.records if r.phase == name]

    @property
    def first_boosted(self) -> IterationRecord:
        recs = self.phase(BOOSTED)
        return recs[0] if recs else self.final

    @property
    def converged(self) -> bool:
        return self.final.converged

    def settled(self, window: int | None = None) -> tuple:
        """``(welfare, revenue)`` averaged over the last ``window`` records."""
        if window is None:
            window = self.config.summary_window if self.config is not None else 1
        tail = self.records[-window:]
        return (float(np.mean([r.welfare for r in tail])),
                float(np.mean([r.revenue for r in tail])))

    @property
    def alphas(self) -> np.ndarray:
        return np.stack([r.alpha for r in self.records])

    @property
    def welfare(self) -> np.ndarray:
        return np.array([r.welfare for r in self.records])

    @property
    def revenue(self) -> np.ndarray:
        return np.array([r.revenue for r in self.records])


def _start(inst: ProblemInstance, config: ExperimentConfig, alpha=None):
    config.check()
    inst.check()
    mechanism = resolve_mechanism(config.mechanism)
    a0 = config.initial_multipliers(inst.num_bidders) if alpha is None else np.asarray(alpha, float)
    return mechanism, a0


def _boosts_for(inst, mechanism, scheme, c, order) -> BoostMatrix:
    b = make_boosts(inst, scheme, c, order)
    if mechanism == FPA and b.z.any():
        raise ValueError("first-price auctions do not support boosts")
    return b


def _continue(inst, config, mechanism, label, pre, alpha, boosts, pre_conv) -> SimulationTrace:
    # a boosted phase with no steps inherits the pre-train's convergence flag
    z = boosts.z
    start = len(pre)
    recs, alpha, conv = _run_phase(inst, config, mechanism, z, alpha, config.boosted_iters,
                                   BOOSTED, start, pre_conv and not z.any())
    final, _ = _record(inst, mechanism, z, alpha, start + len(recs), FINAL, 0, conv)
    return SimulationTrace(label, pre + recs + [final], boosts, config)


def run_dynamics(inst: ProblemInstance, config: ExperimentConfig,
                 order: BenchmarkOrder | None = None, boosts: BoostMatrix | None = None,
                 alpha=None) -> SimulationTrace:
    """Pre-train without boosts, then iterate with the configured boosts.

    ``boosts`` overrides the scheme in ``config``; ``order`` is needed for
    benchmark boosts; ``alpha`` overrides the configured starting multipliers.
    """
    mechanism, a0 = _start(inst, config, alpha)
    if boosts is None:
        boosts = _boosts_for(inst, mechanism, config.scheme, config.c, order)
    pre, a, conv = _run_phase(inst, config, mechanism, zero_boosts(inst).z, a0,
                              config.pretrain_iters, PRETRAIN, 0)
    return _continue(inst, config, mechanism, boosts.label, pre, a, boosts, conv)


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class LiftRow:
    label: str
    scheme: str
    c: float
    welfare_lift: float
    revenue_lift: float
    initial_welfare_lift: float
    initial_revenue_lift: float


def _lift(x: float, base: float) -> float:
    if base > 0:
        return x / base - 1.0
    return 0.0 if x == base else math.inf


@dataclass(eq=False)
class SweepReport:
    mechanism: str
    baseline: SimulationTrace
    traces: list
    rows: list

    def normalized(self, trace: SimulationTrace) -> tuple:
        """Per-record welfare and revenue divided by the baseline at the same iteration."""
        base = self.baseline.records
        w, r = [], []
        for rec in trace.records:
            b = base[min(rec.iteration, len(base) - 1)]
            w.append(rec.welfare / b.welfare if b.welfare > 0 else math.nan)
            r.append(rec.revenue / b.revenue if b.revenue > 0 else math.nan)
        return np.array(w), np.array(r)

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "baseline": dict(zip(("welfare", "revenue"), self.baseline.settled()),
                         converged=self.baseline.converged),
            "rows": [asdict(r) for r in self.rows],
            "converged": {t.label: t.converged for t in self.traces},
        }

    def format_table(self) -> str:
        return format_lift_table(self.mechanism, [asdict(r) for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_traces_csv(buf, self)
        return buf.getvalue()


def run_sweep(inst: ProblemInstance, schemes, config: ExperimentConfig,
              order: BenchmarkOrder | None = None, alpha=None) -> SweepReport:
    """One shared pre-train, then a boosted continuation per ``(scheme, c)``.

    The no-boost continuation is the baseline every lift is measured against.
    """
    mechanism, a0 = _start(inst, config, alpha)
    pre, a, conv = _run_phase(inst, config, mechanism, zero_boosts(inst).z, a0,
                              config.pretrain_iters, PRETRAIN, 0)
    baseline = _continue(inst, config, mechanism, "baseline", pre, a, zero_boosts(inst), conv)
    traces, rows = [], []
    for scheme, c in schemes:
        boosts = _boosts_for(inst, mechanism, scheme, c, order)
        tr = _continue(inst, config, mechanism, boosts.label, pre, a, boosts, conv)
        traces.append(tr)
        b0, t0 = baseline.first_boosted, tr.first_boosted
        bw, br = baseline.settled()
        tw, tr_ = tr.settled()
        rows.append(LiftRow(
            boosts.label, scheme, float(c),
            _lift(tw, bw), _lift(tr_, br),
            _lift(t0.welfare, b0.welfare),
            _lift(t0.revenue, b0.revenue),
        ))
    return SweepReport(mechanism, baseline, traces, rows)


@dataclass(eq=False)
class BatchReport:
    mechanism: str
    reports: list
    labels: list

    def mean(self, attr: str) -> dict:
        return {lab: float(np.mean([getattr(r.rows[k], attr) for r in self.reports]))
                for k, lab in enumerate(self.labels)}

    def rows(self) -> list:
        keys = ("welfare_lift", "revenue_lift", "initial_welfare_lift", "initial_revenue_lift")
        means = {k: self.mean(k) for k in keys}
        out = []
        for k, lab in enumerate(self.labels):
            first = self.reports[0].rows[k] if self.reports else None
            out.append({"label": lab, "scheme": first.scheme if first else "",
                        "c": first.c if first else 0.0,
                        **{key: means[key][lab] for key in keys}})
        return out

    def to_dict(self) -> dict:
        return {"mechanism": self.mechanism, "instances": len(self.reports),
                "rows": self.rows()}

    def format_table(self) -> str:
        return format_lift_table(self.mechanism, self.rows())


def run_batch(items, schemes, config: ExperimentConfig) -> BatchReport:
    """Sweep each ``(instance, order)`` pair and keep the per-instance reports."""
    schemes = list(schemes)
    reports = [run_sweep(inst, schemes, config, order) for inst, order in items]
    labels = [r.label for r in reports[0].rows] if reports else []
    return BatchReport(resolve_mechanism(config.mechanism), reports, labels)


def _g6(x: float) -> str:
    return f"{x:.6g}"


def format_lift_table(mechanism: str, rows: list) -> str:
    """Aligned text table: one row per scheme, welfare and revenue lifts in percent."""
    head = ["Boosts", f"{mechanism.upper()} Welfare", f"{mechanism.upper()} Revenue",
            "Initial Welfare", "Initial Revenue"]
    body = [["baseline", "+0%", "+0%", "+0%", "+0%"]]
    for r in rows:
        body.append([r["label"]] + [
            f"{'+' if r[k] >= 0 else ''}{_g6(100 * r[k])}%"
            for k in ("welfare_lift", "revenue_lift", "initial_welfare_lift", "initial_revenue_lift")
        ])
    widths = [max(len(row[c]) for row in [head] + body) for c in range(len(head))]
    fmt = lambda row: "  ".join(cell.rjust(w) if c else cell.ljust(w)
                                for c, (cell, w) in enumerate(zip(row, widths)))
    rule = "-" * len(fmt(head))
    return "\n".join([fmt(head), rule] + [fmt(r) for r in body]) + "\n"


def write_traces_csv(fh, report: SweepReport) -> None:
    n = report.baseline.final.alpha.size
    cols = ["iteration", "phase", "scheme"]
    for name in ("alpha", "value", "spend", "target"):
        cols += [f"{name}_{i}" for i in range(n)]
    cols += ["welfare", "revenue", "normalized_welfare", "normalized_revenue", "converged"]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    for trace in [report.baseline] + report.traces:
        nw, nr = report.normalized(trace)
        for rec, a, b in zip(trace.records, nw, nr):
            row = [rec.iteration, rec.phase, trace.label]
            for arr in (rec.alpha, rec.value, rec.spend, rec.target):
                row += [repr(float(x)) for x in arr]
            row += [repr(rec.welfare), repr(rec.revenue), repr(float(a)), repr(float(b)),
                    int(rec.converged)]
            w.writerow(row)


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True)
