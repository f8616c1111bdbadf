"""Exact deduplication over 128-bit fingerprints of canonicalized pair text."""
from __future__ import annotations

import hashlib
import re
from typing import Callable, Iterable, Iterator

from .corpus import BitextError, SentencePair

MODE_PAIR = "pair"
MODE_SRC_ONLY = "src-only"
MODE_TGT_ONLY = "tgt-only"
MODES = (MODE_PAIR, MODE_SRC_ONLY, MODE_TGT_ONLY)

_WS_RUN = re.compile(r"\s+")


def _canon(text: str) -> str:
    # Pair text is NFC already (ingest); collapse incidental whitespace.
    return _WS_RUN.sub(" ", text).strip()


def canonical_key(pair: SentencePair, mode: str = MODE_PAIR) -> str:
    if mode == MODE_PAIR:
        return _canon(pair.src) + "\t" + _canon(pair.tgt)
    if mode == MODE_SRC_ONLY:
        return _canon(pair.src)
    if mode == MODE_TGT_ONLY:
        return _canon(pair.tgt)
    raise BitextError(f"unknown dedup mode: {mode!r}")


def fingerprint(key: str) -> bytes:
    """128-bit blake2b digest; fast, stable, not used for security."""
    return hashlib.blake2b(key.encode("utf-8"), digest_size=16).digest()


def iter_dedup(
    pairs: Iterable[SentencePair],
    mode: str = MODE_PAIR,
    shards: int = 1,
    strict: bool = False,
    on_removed: Callable[[SentencePair], None] | None = None,
) -> Iterator[SentencePair]:
    """Yield first occurrences in input order; drop later duplicates.

    ``shards`` partitions the key space by fingerprint prefix into disjoint
    sets (the parallel decomposition); survivors never depend on the shard
    count. ``strict`` keys on the canonicalized text itself instead of its
    fingerprint, for collision-free verification.
    """
    if mode not in MODES:
        raise BitextError(f"unknown dedup mode: {mode!r}")
    if shards < 1:
        raise BitextError(f"shard count must be >= 1, got {shards}")
    seen: list[set[bytes] | set[str]] = [set() for _ in range(shards)]
    for pair in pairs:
        key = canonical_key(pair, mode)
        fp = fingerprint(key)
        shard = seen[fp[0] % shards]
        marker: bytes | str = key if strict else fp
        if marker in shard:
            if on_removed is not None:
                on_removed(pair)
            continue
        shard.add(marker)  # type: ignore[arg-type]
        yield pair


def dedup_exact(
    pairs: Iterable[SentencePair],
    mode: str = MODE_PAIR,
    shards: int = 1,
    strict: bool = False,
) -> tuple[list[SentencePair], int]:
    """Materialized variant: (kept pairs in order, removed count)."""
    removed = 0

    def count(_: SentencePair) -> None:
        nonlocal removed
        removed += 1

    kept = list(iter_dedup(pairs, mode=mode, shards=shards, strict=strict, on_removed=count))
    return kept, removed
