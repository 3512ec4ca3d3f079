"""Throughput accounting, run aggregation, and the two-proportion comparison."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .config import ScenarioConfig
from .grid import AgentRecord, CellState, band_height

__all__ = [
    "ProportionTest",
    "RunReport",
    "SweepReport",
    "SweepRow",
    "aggregate",
    "band_height",
    "crossed",
    "proportion_test",
    "two_proportion_test",
]


def crossed(agent: AgentRecord, height: int, band: int) -> bool:
    """True once the agent is inside the opposite side's starting band (sticky)."""
    if agent.crossed:
        return True
    if agent.group == CellState.TOP:
        return agent.row >= height - band
    return agent.row <= band - 1


@dataclass
class RunReport:
    config: ScenarioConfig
    seed: int
    executor: str
    crossed_top: np.ndarray  # cumulative, one entry per step
    crossed_bottom: np.ndarray
    moved: np.ndarray
    runtime: float
    threads: int = 1

    @property
    def crossed_total(self) -> np.ndarray:
        return self.crossed_top + self.crossed_bottom

    @property
    def agents_total(self) -> int:
        return self.config.agents_total

    @property
    def throughput(self) -> int:
        return int(self.crossed_total[-1]) if len(self.moved) else 0


class ProportionTest(NamedTuple):
    p_value: float
    z: float
    defined: bool


def two_proportion_test(x1: int, x2: int, n: int) -> ProportionTest:
    """Two-sided pooled z-test for equal success probability, ``x1/n`` vs ``x2/n``."""
    if n <= 0:
        return ProportionTest(1.0, 0.0, False)
    if x1 == x2:
        return ProportionTest(1.0, 0.0, True)
    pooled = (x1 + x2) / (2 * n)
    se = math.sqrt(pooled * (1 - pooled) * 2 / n)
    z = (x1 - x2) / n / se
    return ProportionTest(math.erfc(abs(z) / math.sqrt(2)), z, True)


def proportion_test(run_a: RunReport, run_b: RunReport) -> ProportionTest:
    if run_a.agents_total != run_b.agents_total:
        raise ValueError("runs must have the same number of agents")
    return two_proportion_test(run_a.throughput, run_b.throughput, run_a.agents_total)


@dataclass(frozen=True)
class SweepRow:
    agents_total: int
    model: str
    repeats: int
    throughput_mean: float
    throughput_sd: float
    runtime_mean: float


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)


def aggregate(reports: Sequence[RunReport]) -> SweepRow:
    """Mean and sample sd of throughput plus mean runtime over repeat seeds."""
    if not reports:
        raise ValueError("aggregate needs at least one report")
    first = reports[0].config
    for rep in reports[1:]:
        if rep.config.replace(seed=first.seed) != first:
            raise ValueError("reports differ in more than the seed")
    tp = [float(r.throughput) for r in reports]
    sd = statistics.stdev(tp) if len(tp) > 1 else 0.0
    return SweepRow(
        agents_total=first.agents_total,
        model=first.model,
        repeats=len(reports),
        throughput_mean=statistics.fmean(tp),
        throughput_sd=sd,
        runtime_mean=statistics.fmean(r.runtime for r in reports),
    )
