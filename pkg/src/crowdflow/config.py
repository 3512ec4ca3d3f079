"""Scenario configuration: defaults, validation, and the flat ``key = value`` format."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

__all__ = ["ConfigError", "ScenarioConfig", "format_config", "parse_config", "read_config_file"]

MODELS = ("lem", "aco")
EXECUTORS = ("seq", "par")


class ConfigError(ValueError):
    """Invalid scenario configuration. The message names the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    width: int = 480
    height: int = 480
    agents_per_side: int = 1280
    model: str = "aco"
    steps: int = 25000
    seed: int = 1
    repeats: int = 10
    executor: str = "seq"
    threads: int = max(os.cpu_count() or 1, 1)
    d0: float = 2.0
    mu_sel: float = 1.0
    sigma_sel: float = 0.5
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.05
    tau0: float = 0.1
    q: float = 1.0
    out_dir: str = "out"

    def __post_init__(self) -> None:
        validate(self)

    @property
    def agents_total(self) -> int:
        return 2 * self.agents_per_side

    @property
    def band(self) -> int:
        return -(-self.agents_per_side // self.width)

    def check_capacity(self) -> None:
        """Both starting bands must fit the grid without overlapping."""
        if 2 * self.band > self.height:
            raise ConfigError(
                "agents_per_side",
                f"{self.agents_per_side} agents per side need 2 x {self.band} rows, "
                f"grid has {self.height}",
            )

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def validate(cfg: ScenarioConfig) -> None:
    for key in ("width", "height"):
        v = getattr(cfg, key)
        if v < 16 or v % 16:
            raise ConfigError(key, f"must be a multiple of 16 and >= 16, got {v}")
    if cfg.agents_per_side < 0:
        raise ConfigError("agents_per_side", "must be >= 0")
    if cfg.model not in MODELS:
        raise ConfigError("model", f"expected one of {MODELS}, got {cfg.model!r}")
    if cfg.executor not in EXECUTORS:
        raise ConfigError("executor", f"expected one of {EXECUTORS}, got {cfg.executor!r}")
    if cfg.steps < 0:
        raise ConfigError("steps", "must be >= 0")
    if cfg.repeats < 1:
        raise ConfigError("repeats", "must be >= 1")
    if cfg.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "must fit in an unsigned 64-bit integer")
    if not cfg.d0 > 1:
        raise ConfigError("d0", f"must be > 1, got {cfg.d0}")
    if cfg.sigma_sel < 0:
        raise ConfigError("sigma_sel", "must be >= 0")
    if cfg.alpha < 0:
        raise ConfigError("alpha", "must be >= 0")
    if cfg.beta < 0:
        raise ConfigError("beta", "must be >= 0")
    if not 0 < cfg.rho <= 1:
        raise ConfigError("rho", f"must be in (0, 1], got {cfg.rho}")
    if not cfg.tau0 > 0:
        raise ConfigError("tau0", "must be > 0")
    if not cfg.q > 0:
        raise ConfigError("q", "must be > 0")


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(key: str, raw: Any) -> Any:
    kind = _FIELD_TYPES[key]
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "int":
            return int(text, 0)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(key, f"malformed {kind} value {raw!r}") from None
    return text.lower() if key in ("model", "executor") else text


def read_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(key or f"line {lineno}", f"expected 'key = value' on line {lineno}")
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown key")
        values[key] = value.strip()
    return values


def parse_config(path: str | Path | None = None,
                 overrides: Mapping[str, Any] | None = None) -> ScenarioConfig:
    """Build a config from defaults, then ``path``, then ``overrides``.

    ``overrides`` entries whose value is None are ignored, so an argparse
    namespace can be passed through unchanged.
    """
    merged: dict[str, Any] = {}
    if path is not None:
        merged.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown key")
        merged[key] = value
    return ScenarioConfig(**{k: _coerce(k, v) for k, v in merged.items()})


def format_config(cfg: ScenarioConfig) -> str:
    """Serialize to the flat format; ``parse_config`` reads it back to an equal config."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        lines.append(f"{f.name} = {value if isinstance(value, str) else repr(value)}\n")
    return "".join(lines)
