"""World representation: occupancy/index grids, agent table, neighborhood geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from .config import ConfigError, ScenarioConfig
from .rng import Phase, uniform_array

__all__ = [
    "AgentRecord",
    "CellState",
    "DistanceTable",
    "Neighborhood",
    "SLOT_NAMES",
    "SimState",
    "band_height",
    "check_invariants",
    "distance_table",
    "mirror_state",
    "neighborhood",
    "new_environment",
    "slot_offsets",
    "state_from_grid",
]


class CellState(IntEnum):
    EMPTY = 0
    TOP = 1
    BOTTOM = 2


F, FL, FR, L, R, B, BL, BR = range(8)
SLOT_NAMES = ("F", "FL", "FR", "L", "R", "B", "BL", "BR")

# (forward component, column offset) per slot. L/R are absolute west/east for
# both groups, so flipping the grid vertically maps every slot label onto itself.
_SLOT_FWD = np.array([1, 1, 1, 0, 0, -1, -1, -1], dtype=np.int64)
_SLOT_DC = np.array([0, -1, 1, -1, 1, 0, -1, 1], dtype=np.int64)


def slot_offsets(group: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column offsets of the 8 slots for ``group`` (Top moves south)."""
    sign = 1 if group == CellState.TOP else -1
    return _SLOT_FWD * sign, _SLOT_DC.copy()


def band_height(agents_per_side: int, width: int) -> int:
    """Rows needed to hold one side's agents: ceil(agents_per_side / width)."""
    if width <= 0:
        raise ValueError("width must be positive")
    return -(-agents_per_side // width)


@dataclass(frozen=True)
class DistanceTable:
    d: tuple[float, ...]
    d0: float

    @property
    def d_min(self) -> float:
        return self.d[F]

    def as_array(self) -> np.ndarray:
        return np.array(self.d, dtype=np.float64)


def distance_table(d0: float = 2.0) -> DistanceTable:
    """Distance from each slot to a nominal goal point ``d0`` cells ahead.

    The slot's forward component f and lateral offset l give
    ``sqrt((d0 - f)**2 + l**2)``.
    """
    if not d0 > 1:
        raise ValueError(f"d0 must be > 1, got {d0}")
    d = tuple(math.sqrt((d0 - int(f)) ** 2 + int(l) ** 2) for f, l in zip(_SLOT_FWD, _SLOT_DC))
    return DistanceTable(d=d, d0=float(d0))


@dataclass(frozen=True)
class AgentRecord:
    index: int
    group: CellState
    row: int
    col: int
    future_row: int
    future_col: int
    tour_length: float
    crossed: bool


@dataclass(frozen=True)
class Neighborhood:
    """Goal-relative view around one agent: ``cells[i]`` is None when out of bounds."""

    center: tuple[int, int]
    group: CellState
    cells: tuple[Optional[tuple[int, int]], ...]
    free: tuple[bool, ...]

    @property
    def forward(self) -> Optional[tuple[int, int]]:
        return self.cells[F]

    def free_mask(self) -> np.ndarray:
        return np.array(self.free, dtype=np.bool_)


@dataclass
class SimState:
    """The entire mutable world. Agent ``k`` (1-based id) lives at array slot ``k - 1``."""

    width: int
    height: int
    band: int
    seed: int
    occupancy: np.ndarray  # int8 (H, W)
    index: np.ndarray  # int32 (H, W)
    group: np.ndarray  # int8 (N,)
    row: np.ndarray  # int32 (N,)
    col: np.ndarray
    future_row: np.ndarray
    future_col: np.ndarray
    tour: np.ndarray  # float64 (N,)
    crossed: np.ndarray  # bool (N,)
    pheromone: np.ndarray  # float64 (2, H, W); [0] top, [1] bottom
    scores: np.ndarray  # float64 (N, 8)
    step: int = 0
    # Resolve draws and contender order use the vertically flipped frame.
    mirrored: bool = False
    dtable: DistanceTable = field(default_factory=distance_table)

    @property
    def n_agents(self) -> int:
        return int(self.group.shape[0])

    def agent(self, k: int) -> AgentRecord:
        i = k - 1
        return AgentRecord(
            index=k,
            group=CellState(int(self.group[i])),
            row=int(self.row[i]),
            col=int(self.col[i]),
            future_row=int(self.future_row[i]),
            future_col=int(self.future_col[i]),
            tour_length=float(self.tour[i]),
            crossed=bool(self.crossed[i]),
        )

    def agents(self) -> list[AgentRecord]:
        return [self.agent(k) for k in range(1, self.n_agents + 1)]

    def crossed_counts(self) -> tuple[int, int]:
        top = self.group == CellState.TOP
        return int(np.count_nonzero(self.crossed & top)), int(np.count_nonzero(self.crossed & ~top))

    def copy(self) -> "SimState":
        out = SimState(**{k: (v.copy() if isinstance(v, np.ndarray) else v)
                          for k, v in self.__dict__.items()})
        return out


def _empty_state(width: int, height: int, n: int, band: int, seed: int, tau0: float,
                 dtable: DistanceTable) -> SimState:
    return SimState(
        width=width,
        height=height,
        band=band,
        seed=seed,
        occupancy=np.zeros((height, width), dtype=np.int8),
        index=np.zeros((height, width), dtype=np.int32),
        group=np.zeros(n, dtype=np.int8),
        row=np.zeros(n, dtype=np.int32),
        col=np.zeros(n, dtype=np.int32),
        future_row=np.zeros(n, dtype=np.int32),
        future_col=np.zeros(n, dtype=np.int32),
        tour=np.zeros(n, dtype=np.float64),
        crossed=np.zeros(n, dtype=np.bool_),
        pheromone=np.full((2, height, width), tau0, dtype=np.float64),
        scores=np.zeros((n, 8), dtype=np.float64),
        dtable=dtable,
    )


def _sample_cells(seed: int, first_id: int, n: int, n_cells: int) -> np.ndarray:
    """Partial Fisher-Yates: n distinct cells out of n_cells, draw i keyed by agent id."""
    ids = np.arange(first_id, first_id + n, dtype=np.uint64)
    u = uniform_array(seed, 0, Phase.PLACEMENT, ids, 0)
    perm = np.arange(n_cells, dtype=np.int64)
    for i in range(n):
        j = i + min(int(u[i] * (n_cells - i)), n_cells - i - 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:n]


def new_environment(config: ScenarioConfig, seed: int | None = None) -> SimState:
    """Initial scenario: each side's agents scattered over its edge band.

    Top agents get ids 1..n in rows [0, band); Bottom agents get n+1..2n in
    rows [height - band, height).
    """
    seed = config.seed if seed is None else seed
    w, h, n = config.width, config.height, config.agents_per_side
    config.check_capacity()
    band = band_height(n, w)
    state = _empty_state(w, h, 2 * n, band, seed, config.tau0, distance_table(config.d0))
    for g, first_row in ((CellState.TOP, 0), (CellState.BOTTOM, h - band)):
        first_id = 1 if g == CellState.TOP else n + 1
        cells = _sample_cells(seed, first_id, n, band * w)
        rows = first_row + cells // w
        cols = cells % w
        sl = slice(first_id - 1, first_id - 1 + n)
        state.group[sl] = g
        state.row[sl] = rows
        state.col[sl] = cols
        state.occupancy[rows, cols] = g
        state.index[rows, cols] = np.arange(first_id, first_id + n, dtype=np.int32)
    state.future_row[:] = state.row
    state.future_col[:] = state.col
    return state


def state_from_grid(grid: np.ndarray, *, seed: int = 0, band: int = 1, tau0: float = 0.1,
                    d0: float = 2.0) -> SimState:
    """Build a state from an explicit occupancy grid (0/1/2). Ids follow row-major order."""
    grid = np.asarray(grid, dtype=np.int8)
    h, w = grid.shape
    rows, cols = np.nonzero(grid)
    n = rows.size
    state = _empty_state(w, h, n, band, seed, tau0, distance_table(d0))
    state.occupancy[:] = grid
    state.index[rows, cols] = np.arange(1, n + 1, dtype=np.int32)
    state.group[:] = grid[rows, cols]
    state.row[:] = rows
    state.col[:] = cols
    state.future_row[:] = rows
    state.future_col[:] = cols
    return state


def mirror_state(state: SimState) -> SimState:
    """Flip the world top<->bottom, swapping group labels and keeping agent ids.

    The result also toggles ``mirrored`` so cell-keyed draws follow the flip.
    """
    h = state.height
    out = state.copy()
    swap = np.array([0, 2, 1], dtype=np.int8)
    out.occupancy = swap[state.occupancy[::-1]].copy()
    out.index = state.index[::-1].copy()
    out.group = swap[state.group]
    out.row = (h - 1 - state.row).astype(np.int32)
    out.future_row = (h - 1 - state.future_row).astype(np.int32)
    out.pheromone = state.pheromone[::-1, ::-1, :].copy()
    out.mirrored = not state.mirrored
    return out


def neighborhood(state: SimState, agent: AgentRecord | int) -> Neighborhood:
    """Goal-relative 8-slot view of ``agent`` against the current occupancy."""
    rec = agent if isinstance(agent, AgentRecord) else state.agent(agent)
    drs, dcs = slot_offsets(rec.group)
    cells: list[Optional[tuple[int, int]]] = []
    free: list[bool] = []
    for dr, dc in zip(drs, dcs):
        r, c = rec.row + int(dr), rec.col + int(dc)
        if 0 <= r < state.height and 0 <= c < state.width:
            cells.append((r, c))
            free.append(state.occupancy[r, c] == CellState.EMPTY)
        else:
            cells.append(None)
            free.append(False)
    return Neighborhood(center=(rec.row, rec.col), group=rec.group, cells=tuple(cells),
                        free=tuple(free))


def check_invariants(state: SimState, expected_counts: tuple[int, int] | None = None) -> None:
    """Raise AssertionError if grids and agent table disagree."""
    occ, idx = state.occupancy, state.index
    assert set(np.unique(occ)).issubset({0, 1, 2}), "unknown cell state"
    assert np.array_equal(idx == 0, occ == 0), "index/occupancy mismatch"
    n = state.n_agents
    ids = np.sort(idx[idx > 0])
    assert np.array_equal(ids, np.arange(1, n + 1)), "index grid is not a permutation of 1..N"
    assert np.array_equal(idx[state.row, state.col], np.arange(1, n + 1)), "agent rows out of sync"
    assert np.array_equal(occ[state.row, state.col], state.group), "group/occupancy mismatch"
    if expected_counts is not None:
        counts = (int(np.count_nonzero(occ == 1)), int(np.count_nonzero(occ == 2)))
        assert counts == expected_counts, f"agent counts changed: {counts} != {expected_counts}"
    assert np.all(state.pheromone >= 0), "negative pheromone"
