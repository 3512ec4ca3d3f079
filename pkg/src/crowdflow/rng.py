"""Counter-based random numbers.

Every draw is a pure function of ``(seed, step, phase, entity, counter)``.
There is no generator state to advance, so any worker can evaluate any draw
in any order and get the same bits. The mixer is the SplitMix64 finalizer
applied once per key field.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import NamedTuple

import numba as nb
import numpy as np

__all__ = [
    "Phase",
    "RngKey",
    "hash_key",
    "normal",
    "normal_array",
    "uniform",
    "uniform_array",
]

_MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


class Phase(IntEnum):
    PLACEMENT = 0
    LEM_SELECT = 1
    ACO_SELECT = 2
    RESOLVE = 3
    TIE_BREAK = 4


class RngKey(NamedTuple):
    seed: int
    step: int
    phase: Phase
    entity: int
    counter: int = 0


@nb.njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True, nogil=True)
def hash_key(seed, step, phase, entity, counter):
    """64-bit hash of a key tuple. Arguments are reinterpreted as uint64."""
    h = _mix(np.uint64(seed) + _GOLDEN)
    h = _mix(h ^ (np.uint64(step) + _GOLDEN))
    h = _mix(h ^ (np.uint64(phase) + _GOLDEN))
    h = _mix(h ^ (np.uint64(entity) + _GOLDEN))
    h = _mix(h ^ (np.uint64(counter) + _GOLDEN))
    return h


@nb.njit(cache=True, nogil=True)
def uniform_u(seed, step, phase, entity, counter):
    # top 53 bits -> [0, 1)
    return np.float64(hash_key(seed, step, phase, entity, counter) >> _S11) * _TWO_M53


@nb.njit(cache=True, nogil=True)
def normal_u(seed, step, phase, entity, mu, sigma):
    """Box-Muller on counters 0 and 1 of the key; cosine branch only."""
    u1 = uniform_u(seed, step, phase, entity, 0)
    u2 = uniform_u(seed, step, phase, entity, 1)
    z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(_TWO_PI * u2)
    return mu + sigma * z


def seed64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & _MASK64)


def uniform(key: RngKey) -> float:
    """Uniform variate in [0, 1) for ``key``."""
    return float(
        uniform_u(seed64(key.seed), np.uint64(key.step), np.uint64(int(key.phase)),
                  np.uint64(key.entity), np.uint64(key.counter))
    )


def normal(key: RngKey, mu: float, sigma: float) -> float:
    """Normal(mu, sigma) variate for ``key``. The key's counter field is ignored;
    counters 0 and 1 are consumed."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return float(
        normal_u(seed64(key.seed), np.uint64(key.step), np.uint64(int(key.phase)),
                 np.uint64(key.entity), float(mu), float(sigma))
    )


@nb.njit(cache=True)
def _uniform_fill(seed, step, phase, entities, counters, out):
    for i in range(out.shape[0]):
        out[i] = uniform_u(seed, step, phase, np.uint64(entities[i]), np.uint64(counters[i]))


@nb.njit(cache=True)
def _normal_fill(seed, step, phase, entities, mu, sigma, out):
    for i in range(out.shape[0]):
        out[i] = normal_u(seed, step, phase, np.uint64(entities[i]), mu, sigma)


def uniform_array(seed: int, step: int, phase: Phase, entities, counters) -> np.ndarray:
    """Vectorized :func:`uniform` over broadcast entity/counter arrays."""
    ent, ctr = np.broadcast_arrays(np.asarray(entities, dtype=np.uint64),
                                   np.asarray(counters, dtype=np.uint64))
    out = np.empty(ent.size, dtype=np.float64)
    _uniform_fill(seed64(seed), np.uint64(step), np.uint64(int(phase)),
                  np.ascontiguousarray(ent).ravel(), np.ascontiguousarray(ctr).ravel(), out)
    return out.reshape(ent.shape)


def normal_array(seed: int, step: int, phase: Phase, entities, mu: float = 0.0,
                 sigma: float = 1.0) -> np.ndarray:
    ent = np.ascontiguousarray(np.asarray(entities, dtype=np.uint64))
    out = np.empty(ent.size, dtype=np.float64)
    _normal_fill(seed64(seed), np.uint64(step), np.uint64(int(phase)), ent.ravel(),
                 float(mu), float(sigma), out)
    return out.reshape(ent.shape)
