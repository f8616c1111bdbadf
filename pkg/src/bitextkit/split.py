"""Seeded train/dev splitting with order-preserving emission.

Dev membership is an index set drawn by reservoir sampling (Algorithm R), so
it depends only on (total, dev size, seed). The pipeline exploits that: one
pass to count, one pass to route, no corpus in memory.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import BitextError, SentencePair

DEFAULT_DEV_SIZE = 10000
DIALECT_DEV_SIZE = 6000


@dataclass(frozen=True)
class SplitSpec:
    n_dev: int = DEFAULT_DEV_SIZE
    seed: int = 0


def dev_index_set(total: int, n_dev: int, seed: int) -> frozenset[int]:
    """Uniform sample of ``n_dev`` indices from range(total), fixed by seed."""
    if n_dev < 0:
        raise BitextError(f"dev size must be >= 0, got {n_dev}")
    if n_dev > total:
        raise BitextError(f"requested dev size {n_dev} exceeds corpus size {total}")
    rng = random.Random(seed)
    reservoir = list(range(n_dev))
    for i in range(n_dev, total):
        j = rng.randrange(i + 1)
        if j < n_dev:
            reservoir[j] = i
    return frozenset(reservoir)


def sample_split(
    pairs: Sequence[SentencePair] | Iterable[SentencePair],
    spec: SplitSpec = SplitSpec(),
) -> tuple[list[SentencePair], list[SentencePair]]:
    """Partition into (train, dev), both preserving input order.

    Non-sequence inputs are materialized; use dev_index_set directly for
    streaming splits.
    """
    seq = pairs if isinstance(pairs, Sequence) else list(pairs)
    chosen = dev_index_set(len(seq), spec.n_dev, spec.seed)
    train: list[SentencePair] = []
    dev: list[SentencePair] = []
    for i, pair in enumerate(seq):
        (dev if i in chosen else train).append(pair)
    return train, dev
