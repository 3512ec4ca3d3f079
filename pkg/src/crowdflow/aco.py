"""Modified Ant System: random proportional rule, evaporation, tour-length deposits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .grid import FL, FR, BL, BR, CellState, DistanceTable, Neighborhood
from .lem import STAY, CandidateScores, Decision
from .rng import Phase, RngKey, seed64, uniform_u

__all__ = [
    "AcoParams",
    "aco_numerators",
    "aco_select",
    "deposit",
    "evaporate",
    "tour_increment",
]

_ACO_PHASE = np.uint64(Phase.ACO_SELECT)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AcoParams:
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.05
    tau0: float = 0.1
    q: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho must be in (0, 1], got {self.rho}")
        if not self.tau0 > 0 or not self.q > 0:
            raise ValueError("tau0 and q must be > 0")


def heuristic_weights(dtable: DistanceTable, beta: float) -> np.ndarray:
    """``(1 / d_i) ** beta`` per slot."""
    return (1.0 / dtable.as_array()) ** beta


@nb.njit(cache=True, nogil=True)
def aco_numerators_core(free, tau, eta_beta, alpha, out):
    for i in range(8):
        out[i] = tau[i] ** alpha * eta_beta[i] if free[i] else 0.0


@nb.njit(cache=True, nogil=True)
def aco_choose(scores, free, u):
    """Roulette over the numerators with forward priority; ``u`` in [0, 1)."""
    if free[0]:
        return 0
    total = 0.0
    n_free = 0
    for i in range(8):
        if free[i]:
            total += scores[i]
            n_free += 1
    if n_free == 0:
        return STAY
    if total <= 0.0:
        pick = min(int(u * n_free), n_free - 1)
        for i in range(8):
            if free[i]:
                if pick == 0:
                    return i
                pick -= 1
    cum = 0.0
    last = STAY
    for i in range(8):
        if free[i] and scores[i] > 0.0:
            cum += scores[i] / total
            last = i
            if u < cum:
                return i
    # rounding left cum a hair below 1
    return last


@nb.njit(cache=True, nogil=True)
def aco_decide(scores, free, seed, step, agent_id):
    if free[0]:
        return 0
    return aco_choose(scores, free, uniform_u(seed, step, _ACO_PHASE, agent_id, np.uint64(0)))


def aco_numerators(nbhd: Neighborhood, field: np.ndarray, group: CellState,
                   dtable: DistanceTable, params: AcoParams, owner: int = 0) -> CandidateScores:
    """``tau ** alpha * (1 / d) ** beta`` per free slot, reading only ``group``'s field.

    ``field`` is the (2, H, W) pheromone array, top group first.
    """
    own = field[int(group) - 1]
    tau = np.zeros(8, dtype=np.float64)
    for i, cell in enumerate(nbhd.cells):
        if cell is not None:
            tau[i] = own[cell]
    out = np.zeros(8, dtype=np.float64)
    aco_numerators_core(nbhd.free_mask(), tau, heuristic_weights(dtable, params.beta),
                        float(params.alpha), out)
    return CandidateScores(out, owner)


def aco_select(scores: CandidateScores, nbhd: Neighborhood, key: RngKey) -> Decision:
    """Forward cell if free, else roulette over the normalized numerators."""
    slot = aco_decide(scores.scores, nbhd.free_mask(), seed64(key.seed), np.uint64(key.step),
                      np.uint64(key.entity))
    return Decision.from_slot(int(slot), nbhd)


def evaporate(field: np.ndarray, rho: float) -> np.ndarray:
    """Scale every entry by ``1 - rho`` in place and return the field."""
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    field *= 1.0 - rho
    return field


def tour_increment(slot: int) -> float:
    return _SQRT2 if slot in (FL, FR, BL, BR) else 1.0


def deposit(field: np.ndarray, group: CellState, cell: tuple[int, int], tour: np.ndarray,
            agent: int, params: AcoParams) -> np.ndarray:
    """Add ``q / L_k`` at ``cell`` in ``group``'s field; ``tour`` is indexed by agent id - 1.

    Must follow the agent's tour increment for this move.
    """
    length = float(tour[agent - 1])
    if length <= 0:
        raise RuntimeError(f"agent {agent} deposits with tour length {length}")
    field[int(group) - 1][cell] += params.q / length
    return field
