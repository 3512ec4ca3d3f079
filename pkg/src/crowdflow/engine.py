"""Synchronous four-phase step engine with sequential and data-parallel executors.

Each step runs score -> intend -> resolve/commit -> reset with a full barrier
between phases. Score and intend write only per-agent rows, so they are
split by agent range. Resolve is split by destination row: each empty cell
gathers the agents that want it and picks one winner, and the writes a win
produces (destination cell, the winner's source cell, the winner's record,
the destination's pheromone) are disjoint across cells. Every random draw is
keyed by (seed, step, phase, entity), so any partitioning gives the same bits.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numba as nb
import numpy as np

from .aco import aco_decide, aco_numerators_core, heuristic_weights
from .config import ScenarioConfig
from .grid import SimState, check_invariants, new_environment
from .lem import lem_decide, lem_scores_core
from .metrics import RunReport
from .rng import Phase, seed64, uniform_u

__all__ = [
    "Executor",
    "StepReport",
    "intention_phase",
    "movement_phase",
    "reset_phase",
    "run",
    "score_phase",
    "step",
]

_SLOT_FWD = np.array([1, 1, 1, 0, 0, -1, -1, -1], dtype=np.int64)
_SLOT_DC = np.array([0, -1, 1, -1, 1, 0, -1, 1], dtype=np.int64)
# contender gather order around a destination cell (row-major)
_NB_DR = np.array([-1, -1, -1, 0, 0, 1, 1, 1], dtype=np.int64)
_NB_DC = np.array([-1, 0, 1, -1, 1, -1, 0, 1], dtype=np.int64)
_RESOLVE_PHASE = np.uint64(Phase.RESOLVE)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class StepReport:
    step: int
    moved: int
    newly_crossed_top: int
    newly_crossed_bottom: int


@nb.njit(cache=True, nogil=True)
def _free_slots(occ, r, c, sign, free):
    h, w = occ.shape
    for i in range(8):
        nr = r + _SLOT_FWD[i] * sign
        nc = c + _SLOT_DC[i]
        free[i] = 0 <= nr < h and 0 <= nc < w and occ[nr, nc] == 0


@nb.njit(cache=True, nogil=True)
def _score_kernel(lo, hi, aco, occ, pher, group, row, col, dist, eta_beta, alpha, scores):
    h, w = occ.shape
    free = np.zeros(8, dtype=np.bool_)
    tau = np.zeros(8, dtype=np.float64)
    for k in range(lo, hi):
        g = group[k]
        sign = 1 if g == 1 else -1
        r = row[k]
        c = col[k]
        _free_slots(occ, r, c, sign, free)
        if aco:
            for i in range(8):
                nr = r + _SLOT_FWD[i] * sign
                nc = c + _SLOT_DC[i]
                tau[i] = pher[g - 1, nr, nc] if free[i] else 0.0
            aco_numerators_core(free, tau, eta_beta, alpha, scores[k])
        else:
            lem_scores_core(free, dist, scores[k])


@nb.njit(cache=True, nogil=True)
def _intent_kernel(lo, hi, aco, occ, group, row, col, scores, frow, fcol, seed, step,
                   mu_sel, sigma_sel):
    free = np.zeros(8, dtype=np.bool_)
    for k in range(lo, hi):
        sign = 1 if group[k] == 1 else -1
        r = row[k]
        c = col[k]
        _free_slots(occ, r, c, sign, free)
        agent_id = np.uint64(k + 1)
        if aco:
            slot = aco_decide(scores[k], free, seed, step, agent_id)
        else:
            slot = lem_decide(scores[k], free, seed, step, agent_id, mu_sel, sigma_sel)
        if slot >= 0:
            frow[k] = r + _SLOT_FWD[slot] * sign
            fcol[k] = c + _SLOT_DC[slot]
        else:
            frow[k] = r
            fcol[k] = c


@nb.njit(cache=True, nogil=True)
def _resolve_kernel(lo, hi, aco, occ_snap, idx_snap, occ, idx, group, row, col, frow, fcol,
                    tour, crossed, pher, rho, q, band, seed, step, mirrored):
    h, w = occ.shape
    moved = 0
    new_top = 0
    new_bottom = 0
    contenders = np.zeros(8, dtype=np.int64)
    flip = -1 if mirrored else 1
    decay = 1.0 - rho
    for r in range(lo, hi):
        if aco:
            for g in range(2):
                for c in range(w):
                    pher[g, r, c] *= decay
        for c in range(w):
            if occ_snap[r, c] != 0:
                continue
            k = 0
            for j in range(8):
                nr = r + _NB_DR[j] * flip
                nc = c + _NB_DC[j]
                if 0 <= nr < h and 0 <= nc < w:
                    a = idx_snap[nr, nc]
                    if a > 0 and frow[a - 1] == r and fcol[a - 1] == c:
                        contenders[k] = a
                        k += 1
            if k == 0:
                continue
            pick = 0
            if k > 1:
                cell = (h - 1 - r) * w + c if mirrored else r * w + c
                u = uniform_u(seed, step, _RESOLVE_PHASE, np.uint64(cell), np.uint64(0))
                pick = min(int(u * k), k - 1)
            i = contenders[pick] - 1
            sr = row[i]
            sc = col[i]
            g = group[i]
            occ[r, c] = g
            idx[r, c] = i + 1
            occ[sr, sc] = 0
            idx[sr, sc] = 0
            row[i] = r
            col[i] = c
            moved += 1
            if aco:
                tour[i] += _SQRT2 if (sr != r and sc != c) else 1.0
                pher[g - 1, r, c] += q / tour[i]
            if not crossed[i]:
                if (g == 1 and r >= h - band) or (g == 2 and r <= band - 1):
                    crossed[i] = True
                    if g == 1:
                        new_top += 1
                    else:
                        new_bottom += 1
    return moved, new_top, new_bottom


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, n, min(parts, max(n, 1)) + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


class Executor:
    """Runs a range kernel over one span (``seq``) or over ``threads`` spans in a pool.

    ``map`` returns only after every span finished, which is the phase barrier.
    """

    def __init__(self, kind: str = "seq", threads: int = 1):
        if kind not in ("seq", "par"):
            raise ValueError(f"unknown executor {kind!r}")
        self.kind = kind
        self.threads = max(int(threads), 1) if kind == "par" else 1
        self._pool: Optional[ThreadPoolExecutor] = (
            ThreadPoolExecutor(max_workers=self.threads) if kind == "par" else None
        )

    def map(self, kernel: Callable, n: int, *args) -> list:
        if self._pool is None:
            return [kernel(0, n, *args)]
        futures = [self._pool.submit(kernel, lo, hi, *args) for lo, hi in _chunks(n, self.threads)]
        return [f.result() for f in futures]

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self) -> "Executor":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


_SEQ = Executor("seq")


def score_phase(state: SimState, cfg: ScenarioConfig, executor: Executor = _SEQ) -> None:
    aco = cfg.model == "aco"
    eta_beta = heuristic_weights(state.dtable, cfg.beta)
    executor.map(_score_kernel, state.n_agents, aco, state.occupancy, state.pheromone,
                 state.group, state.row, state.col, state.dtable.as_array(), eta_beta,
                 float(cfg.alpha), state.scores)


def intention_phase(state: SimState, cfg: ScenarioConfig, executor: Executor = _SEQ) -> None:
    executor.map(_intent_kernel, state.n_agents, cfg.model == "aco", state.occupancy,
                 state.group, state.row, state.col, state.scores, state.future_row,
                 state.future_col, seed64(state.seed), np.uint64(state.step),
                 float(cfg.mu_sel), float(cfg.sigma_sel))


def movement_phase(state: SimState, cfg: ScenarioConfig,
                   executor: Executor = _SEQ) -> StepReport:
    """Gather contenders per empty cell, commit one winner each, update pheromone.

    For ACO the whole field evaporates once before any deposit of this step.
    """
    occ_snap = state.occupancy.copy()
    idx_snap = state.index.copy()
    parts = executor.map(
        _resolve_kernel, state.height, cfg.model == "aco", occ_snap, idx_snap,
        state.occupancy, state.index, state.group, state.row, state.col, state.future_row,
        state.future_col, state.tour, state.crossed, state.pheromone, float(cfg.rho),
        float(cfg.q), state.band, seed64(state.seed), np.uint64(state.step), state.mirrored,
    )
    moved, top, bottom = (int(sum(p[i] for p in parts)) for i in range(3))
    return StepReport(state.step, moved, top, bottom)


def reset_phase(state: SimState) -> None:
    state.scores[:] = 0.0
    state.future_row[:] = state.row
    state.future_col[:] = state.col
    state.step += 1


def step(state: SimState, cfg: ScenarioConfig, executor: Executor = _SEQ,
         debug: bool = False) -> StepReport:
    counts = None
    if debug:
        counts = (int(np.count_nonzero(state.occupancy == 1)),
                  int(np.count_nonzero(state.occupancy == 2)))
    score_phase(state, cfg, executor)
    intention_phase(state, cfg, executor)
    report = movement_phase(state, cfg, executor)
    reset_phase(state)
    if debug:
        check_invariants(state, counts)
    return report


def run(cfg: ScenarioConfig, executor: str | None = None, threads: int | None = None,
        seed: int | None = None, on_step: Callable[[SimState, StepReport], None] | None = None,
        debug: bool = False) -> RunReport:
    """Build the initial scenario and advance it ``cfg.steps`` times.

    ``runtime`` covers the stepping loop only, not scenario construction.
    """
    kind = executor or cfg.executor
    n_threads = threads or cfg.threads
    seed = cfg.seed if seed is None else seed
    cfg = cfg.replace(seed=seed, executor=kind, threads=n_threads)
    state = new_environment(cfg, seed)
    top = np.zeros(cfg.steps, dtype=np.int64)
    bottom = np.zeros(cfg.steps, dtype=np.int64)
    moved = np.zeros(cfg.steps, dtype=np.int64)
    ct = cb = 0
    with Executor(kind, n_threads) as ex:
        t0 = time.perf_counter()
        for s in range(cfg.steps):
            rep = step(state, cfg, ex, debug)
            ct += rep.newly_crossed_top
            cb += rep.newly_crossed_bottom
            top[s], bottom[s], moved[s] = ct, cb, rep.moved
            if on_step is not None:
                on_step(state, rep)
        runtime = time.perf_counter() - t0 if cfg.steps else 0.0
    return RunReport(config=cfg, seed=seed, executor=kind, crossed_top=top,
                     crossed_bottom=bottom, moved=moved, runtime=runtime,
                     threads=ex.threads)
