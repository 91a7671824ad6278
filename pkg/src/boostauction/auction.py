"""Clearing of position auctions with additive boosts.

All ``m`` auctions of an instance are cleared in one vectorised pass.  Slot
columns are padded to the instance's largest slot count; padded slots carry
position weight 0 and never get a winner.

Ranking scores are ``b[i, j] + z[i, j]``; ties go to the lower bidder index.
Write ``hat[k]`` for the (0-based) k-th highest score of an auction, with
``hat[k] = 0`` once ``k >= n``.  The slot-k winner ``i`` pays

* VCG: ``sum_{kk = k+1}^{s_j} (hat[kk] - z_i)^+ * (pos[kk-1] - pos[kk])`` with
  ``pos[s_j] = 0``, so the last term prices the highest losing score;
* GSP: ``(hat[k+1] - z_i)^+ * pos[k]``;
* FPA: ``b_i * pos[k]`` (no boosts).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosts import as_boost_array
from .instance import ProblemInstance

VCG = "vcg"
GSP = "gsp"
FPA = "fpa"
MECHANISMS = (VCG, GSP, FPA)


@dataclass(frozen=True, eq=False)
class AuctionOutcome:
    """Result of clearing every auction once.

    ``winners[j, k]`` is the bidder in slot ``k`` of auction ``j`` or -1.
    ``payments[i, j]`` is what bidder ``i`` pays in auction ``j``.
    ``order[j]`` and ``scores[j]`` list all bidders and their ranking scores,
    best first.
    """

    mechanism: str
    winners: np.ndarray
    payments: np.ndarray
    order: np.ndarray
    scores: np.ndarray

    @property
    def num_bidders(self) -> int:
        return self.payments.shape[0]

    def allocation(self) -> np.ndarray:
        """Dense 0/1 assignment ``x[i, j, k]``."""
        m, s = self.winners.shape
        x = np.zeros((self.num_bidders, m, s), dtype=int)
        j, k = np.nonzero(self.winners >= 0)
        x[self.winners[j, k], j, k] = 1
        return x

    def slot_of(self, i: int, j: int) -> int | None:
        hit = np.nonzero(self.winners[j] == i)[0]
        return int(hit[0]) if hit.size else None

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "assignment": [[int(w) for w in row if w >= 0] for row in self.winners],
            "payments": self.payments.tolist(),
            "scores": self.scores.tolist(),
        }


def check_bids(inst: ProblemInstance, bids) -> np.ndarray:
    b = np.asarray(bids, dtype=float)
    if b.shape != inst.values.shape:
        raise ValueError(f"bids have shape {b.shape}, instance needs {inst.values.shape}")
    if not (np.isfinite(b).all() and (b >= 0).all()):
        raise ValueError("bids must be finite and non-negative")
    return b


def rank_scores(inst: ProblemInstance, bids, boosts, j: int) -> list:
    """``[(bidder, score), ...]`` for auction ``j``, best first."""
    b = check_bids(inst, bids)
    z = as_boost_array(boosts, inst)
    s = b[:, j] + z[:, j]
    order = np.argsort(-s, kind="stable")
    return [(int(i), float(s[i])) for i in order]


def _clear(inst: ProblemInstance, b: np.ndarray, z: np.ndarray, mechanism: str) -> AuctionOutcome:
    n, m = b.shape
    S = inst.max_slots
    cols = np.arange(m)[:, None]

    scores = (b + z).T
    order = np.argsort(-scores, axis=1, kind="stable")
    ranked = np.take_along_axis(scores, order, axis=1)

    hat = np.zeros((m, S + 1))
    w = min(n, S + 1)
    hat[:, :w] = ranked[:, :w]

    winners = np.full((m, S), -1)
    kk = min(n, S)
    winners[:, :kk] = order[:, :kk]
    winners[np.arange(S)[None, :] >= inst.slots[:, None]] = -1
    filled = winners >= 0
    widx = np.where(filled, winners, 0)
    pos = inst.pos_matrix

    if mechanism == VCG:
        zw = z[widx, cols]
        dpos = pos[:, :-1] - pos[:, 1:]
        gap = np.maximum(hat[:, None, 1:] - zw[:, :, None], 0.0)
        upper = np.triu(np.ones((S, S), dtype=bool))
        pay = (gap * dpos[:, None, :] * upper).sum(axis=2)
    elif mechanism == GSP:
        zw = z[widx, cols]
        pay = np.maximum(hat[:, 1:] - zw, 0.0) * pos[:, :S]
    elif mechanism == FPA:
        pay = b[widx, cols] * pos[:, :S]
    else:
        raise ValueError(f"unknown mechanism {mechanism!r}")

    payments = np.zeros((n, m))
    jj = np.broadcast_to(cols, winners.shape)
    payments[winners[filled], jj[filled]] = pay[filled]
    return AuctionOutcome(mechanism, winners, payments, order, ranked)


def run_vcg(inst: ProblemInstance, bids, boosts=None) -> AuctionOutcome:
    return _clear(inst, check_bids(inst, bids), as_boost_array(boosts, inst), VCG)


def run_gsp(inst: ProblemInstance, bids, boosts=None) -> AuctionOutcome:
    return _clear(inst, check_bids(inst, bids), as_boost_array(boosts, inst), GSP)


def run_fpa(inst: ProblemInstance, bids, boosts=None) -> AuctionOutcome:
    """First-price clearing; a non-zero boost matrix raises ``ValueError``."""
    z = as_boost_array(boosts, inst)
    if np.any(z != 0):
        raise ValueError("first-price auctions do not support boosts")
    return _clear(inst, check_bids(inst, bids), z, FPA)


_RUNNERS = {VCG: run_vcg, GSP: run_gsp, FPA: run_fpa}


def clear(inst: ProblemInstance, bids, boosts=None, mechanism: str = VCG) -> AuctionOutcome:
    try:
        runner = _RUNNERS[mechanism]
    except KeyError:
        raise ValueError(f"unknown mechanism {mechanism!r}") from None
    return runner(inst, bids, boosts)


def received_values(inst: ProblemInstance, winners: np.ndarray) -> np.ndarray:
    """Per-bidder position-weighted value of an assignment (``winners`` as in AuctionOutcome)."""
    if isinstance(winners, AuctionOutcome):
        winners = winners.winners
    j, k = np.nonzero(winners >= 0)
    w = winners[j, k]
    vals = inst.values[w, j] * inst.pos_matrix[j, k]
    return np.bincount(w, weights=vals, minlength=inst.num_bidders)

