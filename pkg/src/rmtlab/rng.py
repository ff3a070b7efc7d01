"""Seeds and addressable random streams.

Every random object in the package is a pure function of a :class:`Seed`.
A seed is mixed with SplitMix64 into a 64-bit key; the key either seeds a
Philox generator (sequential draws) or drives a counter-based SplitMix64
sequence whose n-th output can be computed without producing the first
n - 1 (addressable draws, used for matrix entries).
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (new_state, output)."""
    state = (state + GOLDEN) & MASK64
    return state, mix64(state)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class Seed:
    master: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    @property
    def key(self) -> int:
        """Stream key: SplitMix64 output at state master + stream * GOLDEN."""
        _, out = splitmix64_next((int(self.master) + int(self.stream) * GOLDEN) & MASK64)
        return out

    def spawn(self, index: int) -> "Seed":
        """Child seed for replica/sub-task ``index``, independent of siblings."""
        return Seed(master=self.key, stream=int(index) & MASK64)

    def generator(self) -> np.random.Generator:
        """Counter-based Philox generator keyed by this seed."""
        return np.random.Generator(np.random.Philox(key=self.key))

    def uniforms_at(self, counters: np.ndarray) -> np.ndarray:
        """Uniform draws in (0, 1] at explicit counter positions.

        Output k of the SplitMix64 sequence started at ``key`` is
        mix64(key + (k + 1) * GOLDEN); counters index that sequence directly.
        """
        c = np.asarray(counters, dtype=np.uint64)
        state = np.uint64(self.key) + (c + np.uint64(1)) * np.uint64(GOLDEN)
        bits = _mix64_array(state) >> np.uint64(11)
        return (bits.astype(np.float64) + 1.0) * 2.0**-53

    def to_dict(self) -> dict:
        return {"master": int(self.master), "stream": int(self.stream)}


def default_seed(value: int | None = None) -> Seed:
    """Seed from an explicit value, else from RMT_DEFAULT_SEED, else 0."""
    if value is None:
        env = os.environ.get("RMT_DEFAULT_SEED")
        value = int(env) if env else 0
    return Seed(master=int(value) & MASK64)


def as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    if seed is None:
        return default_seed()
    return Seed(master=int(seed) & MASK64)


def replicate(fn, seed, replicas: int, threads: int = 1) -> list:
    """[fn(seed.spawn(r)) for r in range(replicas)], optionally on threads.

    Each replica owns its stream, so the result does not depend on
    ``threads``.
    """
    seed = as_seed(seed)
    children = [seed.spawn(r) for r in range(replicas)]
    if threads <= 1:
        return [fn(s) for s in children]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, children))
