"""Additive boost schemes and their competitiveness verifiers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import BenchmarkOrder, ProblemInstance

NONE = "none"
UNIFORM = "uniform"
BENCHMARK = "benchmark"
CUSTOM = "custom"

# slack on the competitiveness inequalities; rounding in c*v differences only
VERIFY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BoostMatrix:
    """Boosts ``z[i, j]`` plus the scheme that produced them.

    ``effective`` is set once seller costs have been subtracted; effective
    boosts may be negative, raw ones may not.
    """

    z: np.ndarray
    scheme: str = CUSTOM
    c: float | None = None
    order: BenchmarkOrder | None = None
    effective: bool = False

    def __post_init__(self):
        z = np.array(self.z, dtype=float, ndmin=2)
        if not np.isfinite(z).all():
            raise ValueError("boosts must be finite")
        if not self.effective and (z < 0).any():
            raise ValueError("raw boosts must be non-negative")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def label(self) -> str:
        if self.scheme == UNIFORM:
            return f"uboost-{self.c:g}"
        if self.scheme == BENCHMARK:
            return f"benchmark-{self.c:g}"
        return self.scheme

    def to_dict(self) -> dict:
        doc = {"scheme": self.scheme, "c": self.c, "effective": self.effective,
               "z": self.z.tolist()}
        if self.order is not None:
            doc["benchmark"] = self.order.ranks.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "BoostMatrix":
        order = BenchmarkOrder(doc["benchmark"]) if doc.get("benchmark") is not None else None
        return cls(doc["z"], doc.get("scheme", CUSTOM), doc.get("c"), order,
                   bool(doc.get("effective", False)))


def as_boost_array(boosts, inst: ProblemInstance) -> np.ndarray:
    """Accept a BoostMatrix, a raw array or ``None`` (zero boosts)."""
    if boosts is None:
        return np.zeros_like(inst.values)
    z = boosts.z if isinstance(boosts, BoostMatrix) else np.asarray(boosts, dtype=float)
    if z.shape != inst.values.shape:
        raise ValueError(f"boosts have shape {z.shape}, instance needs {inst.values.shape}")
    return z


def zero_boosts(inst: ProblemInstance) -> BoostMatrix:
    return BoostMatrix(np.zeros_like(inst.values), NONE, 0.0)


def uniform_boosts(inst: ProblemInstance, c: float) -> BoostMatrix:
    """``z = c * v``."""
    if not c >= 0:
        raise ValueError(f"boost weight must be non-negative, got {c}")
    return BoostMatrix(c * inst.values, UNIFORM, float(c))


def benchmark_boosts(inst: ProblemInstance, order: BenchmarkOrder, c: float) -> BoostMatrix:
    """Minimal boosts that are c-benchmark-competitive for ``order``.

    The bidder at rank ``k <= s_j`` gets ``c`` times the summed values of ranks
    ``k..s_j`` (herself included); lower ranks get 0.
    """
    if not c >= 0:
        raise ValueError(f"boost weight must be non-negative, got {c}")
    order.check(inst)
    n, m = inst.values.shape
    z = np.zeros((n, m))
    for j in range(m):
        top = order.ranks[j, : min(n, int(inst.slots[j]))]
        v = inst.values[top, j]
        z[top, j] = c * np.cumsum(v[::-1])[::-1]
    return BoostMatrix(z, BENCHMARK, float(c), order)


def make_boosts(inst: ProblemInstance, scheme: str, c: float = 0.0,
                order: BenchmarkOrder | None = None) -> BoostMatrix:
    if scheme == NONE:
        return zero_boosts(inst)
    if scheme == UNIFORM:
        return uniform_boosts(inst, c)
    if scheme == BENCHMARK:
        if order is None:
            raise ValueError("benchmark boosts need a benchmark order")
        return benchmark_boosts(inst, order, c)
    raise ValueError(f"unknown boost scheme {scheme!r}")


@dataclass(frozen=True)
class CompetitivenessCheck:
    ok: bool
    witness: tuple | None = None  # 0-based indices of one violated inequality

    def __bool__(self) -> bool:
        return self.ok


def _raw(z) -> np.ndarray:
    return z.z if isinstance(z, BoostMatrix) else np.asarray(z, dtype=float)


def is_value_competitive(z, inst: ProblemInstance, c: float,
                         tol: float = VERIFY_TOL) -> CompetitivenessCheck:
    """Check ``z[i,j] - z[i',j] >= c (v[i,j] - v[i',j])`` whenever ``v[i,j] > v[i',j]``.

    The witness is ``(i, i', j)``.
    """
    z = _raw(z)
    v = inst.values
    for j in range(v.shape[1]):
        dv = v[:, j, None] - v[None, :, j]
        dz = z[:, j, None] - z[None, :, j]
        need = c * dv
        bad = (dv > 0) & (dz < need - tol * np.maximum(1.0, np.abs(need)))
        if bad.any():
            i, ip = np.argwhere(bad)[0]
            return CompetitivenessCheck(False, (int(i), int(ip), j))
    return CompetitivenessCheck(True)


def is_benchmark_competitive(z, inst: ProblemInstance, order: BenchmarkOrder, c: float,
                             tol: float = VERIFY_TOL) -> CompetitivenessCheck:
    """Check ``z[o_j(k)] - z[o_j(k')] >= c v[o_j(k)]`` for ``k <= s_j`` and ``k' > k``.

    The witness is ``(j, k, k')`` with 0-based ranks.
    """
    z = _raw(z)
    v = inst.values
    n = v.shape[0]
    for j in range(v.shape[1]):
        ranked = order.ranks[j]
        zr = z[ranked, j]
        vr = v[ranked, j]
        for k in range(min(n, int(inst.slots[j]))):
            need = c * vr[k]
            gaps = zr[k] - zr[k + 1:]
            bad = np.nonzero(gaps < need - tol * max(1.0, abs(need)))[0]
            if bad.size:
                return CompetitivenessCheck(False, (j, k, k + 1 + int(bad[0])))
    return CompetitivenessCheck(True)


def apply_seller_cost(z: BoostMatrix, inst: ProblemInstance) -> BoostMatrix:
    """Effective boosts ``z - psi``; refuses boosts that are already effective."""
    if z.effective:
        raise ValueError("seller costs have already been applied to these boosts")
    return BoostMatrix(z.z - inst.seller_costs, z.scheme, z.c, z.order, effective=True)
