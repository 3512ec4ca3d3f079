"""Least Effort Model: distance-ratio scores and clamped-normal cell selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba as nb
import numpy as np

from .grid import DistanceTable, Neighborhood
from .rng import Phase, RngKey, seed64, normal_u, uniform_u

__all__ = ["CandidateScores", "Decision", "lem_scores", "lem_select", "lem_choose"]

STAY = -1
_LEM_PHASE = np.uint64(Phase.LEM_SELECT)
_TIE_PHASE = np.uint64(Phase.TIE_BREAK)


@dataclass(frozen=True)
class CandidateScores:
    scores: np.ndarray  # (8,) goal-relative order
    owner: int = 0


@dataclass(frozen=True)
class Decision:
    """``target`` is None for Stay."""

    target: Optional[tuple[int, int]]
    slot: Optional[int] = None

    @property
    def is_stay(self) -> bool:
        return self.target is None

    @classmethod
    def from_slot(cls, slot: int, nbhd: Neighborhood) -> "Decision":
        if slot == STAY:
            return cls(None, None)
        return cls(nbhd.cells[slot], slot)


@nb.njit(cache=True, nogil=True)
def lem_scores_core(free, d, out):
    d_min = d[0]
    for i in range(8):
        if d[i] < d_min:
            d_min = d[i]
    for i in range(8):
        out[i] = d_min / d[i] if free[i] else 0.0


@nb.njit(cache=True, nogil=True)
def lem_choose(scores, free, r, u_tie):
    """Slot of the candidate whose score is nearest ``r`` (already clamped).

    Exact ties resolve to tied slot ``floor(u_tie * k)`` in canonical order.
    """
    best = np.inf
    n_tied = 0
    for i in range(8):
        if free[i] and scores[i] > 0.0:
            diff = abs(scores[i] - r)
            if diff < best:
                best = diff
                n_tied = 1
            elif diff == best:
                n_tied += 1
    if n_tied == 0:
        return STAY
    pick = min(int(u_tie * n_tied), n_tied - 1) if n_tied > 1 else 0
    seen = 0
    for i in range(8):
        if free[i] and scores[i] > 0.0 and abs(scores[i] - r) == best:
            if seen == pick:
                return i
            seen += 1
    return STAY


@nb.njit(cache=True, nogil=True)
def lem_decide(scores, free, seed, step, agent_id, mu_sel, sigma_sel):
    if free[0]:
        return 0
    c_max = 0.0
    for i in range(8):
        if free[i] and scores[i] > c_max:
            c_max = scores[i]
    if c_max <= 0.0:
        return STAY
    r = normal_u(seed, step, _LEM_PHASE, agent_id, mu_sel * c_max, sigma_sel * c_max)
    if r < 0.0:
        r = 0.0
    elif r > c_max:
        r = c_max
    u_tie = uniform_u(seed, step, _TIE_PHASE, agent_id, np.uint64(0))
    return lem_choose(scores, free, r, u_tie)


def lem_scores(nbhd: Neighborhood, dtable: DistanceTable, owner: int = 0) -> CandidateScores:
    """Least-effort score per slot: ``d_min / d_i`` when free, else 0."""
    out = np.zeros(8, dtype=np.float64)
    lem_scores_core(nbhd.free_mask(), dtable.as_array(), out)
    return CandidateScores(out, owner)


def lem_select(scores: CandidateScores, nbhd: Neighborhood, key: RngKey,
               mu_sel: float = 1.0, sigma_sel: float = 0.5) -> Decision:
    """Forward cell if free; otherwise the candidate nearest a clamped normal draw.

    The draw has mean ``mu_sel * C_max`` and sd ``sigma_sel * C_max`` and is
    clamped into ``[0, C_max]``. ``key.step``/``key.entity`` identify the
    draw; the phase field is fixed to the LEM selection phase.
    """
    slot = lem_decide(scores.scores, nbhd.free_mask(), seed64(key.seed), np.uint64(key.step),
                      np.uint64(key.entity), float(mu_sel), float(sigma_sel))
    return Decision.from_slot(int(slot), nbhd)

