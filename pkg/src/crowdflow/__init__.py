"""Deterministic bi-directional pedestrian flow on a grid (LEM and Ant System movement)."""

from .config import ConfigError, ScenarioConfig, parse_config
from .engine import Executor, StepReport, run, step
from .grid import CellState, SimState, new_environment
from .metrics import RunReport, aggregate, proportion_test

__all__ = [
    "CellState",
    "ConfigError",
    "Executor",
    "RunReport",
    "ScenarioConfig",
    "SimState",
    "StepReport",
    "aggregate",
    "new_environment",
    "parse_config",
    "proportion_test",
    "run",
    "step",
]
