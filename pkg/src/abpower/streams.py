"""Keyed random substreams.

Every stochastic routine in the package draws from a generator derived from
``(master seed, *key)``.  The generator is a Philox counter-based bit
generator seeded through :class:`numpy.random.SeedSequence`, so the stream
for a given key never depends on which other keys were used, in what order,
or on how many worker threads consumed them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")

SEED_ENV_VAR = "ABPOWER_SEED"


def substream(seed: int, *key: int) -> np.random.Generator:
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seed and stream keys must be nonnegative integers")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def ordered_map(fn: Callable[..., T], items: Iterable, threads: int | None = 1) -> list[T]:
    """Map ``fn`` over ``items`` keeping input order, optionally on a thread pool."""
    items = list(items)
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def derive_seed(seed: int, *key: int) -> int:
    """Integer seed for APIs that take one, derived from ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint32)[0])
