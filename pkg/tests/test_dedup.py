"""Exact deduplication: canonical keys, fingerprints, shard invariance."""
import random

import pytest

from bitextkit.corpus import BitextError, SentencePair
from bitextkit.dedup import (
    MODE_PAIR,
    MODE_SRC_ONLY,
    MODE_TGT_ONLY,
    canonical_key,
    dedup_exact,
    fingerprint,
    iter_dedup,
)


def test_canonical_key_collapses_whitespace():
    a = SentencePair("hello   world", " greetings  ", index=0)
    b = SentencePair("hello world", "greetings", index=1)
    assert canonical_key(a) == canonical_key(b)


def test_canonical_key_modes():
    pair = SentencePair("left", "right")
    assert canonical_key(pair, MODE_PAIR) == "left\tright"
    assert canonical_key(pair, MODE_SRC_ONLY) == "left"
    assert canonical_key(pair, MODE_TGT_ONLY) == "right"
    with pytest.raises(BitextError):
        canonical_key(pair, "both")


def test_fingerprint_is_16_bytes_and_stable():
    fp = fingerprint("some key")
    assert isinstance(fp, bytes) and len(fp) == 16
    assert fp == fingerprint("some key")
    assert fp != fingerprint("some key!")


def _mk(pairs):
    return [SentencePair(s, t, index=i) for i, (s, t) in enumerate(pairs)]


def test_first_occurrence_wins():
    pairs = _mk([("a", "1"), ("b", "2"), ("a", "1"), ("a", "1"), ("c", "3")])
    kept, removed = dedup_exact(pairs)
    assert [(p.src, p.tgt) for p in kept] == [("a", "1"), ("b", "2"), ("c", "3")]
    assert [p.index for p in kept] == [0, 1, 4]
    assert removed == 2


def test_mode_changes_what_counts_as_duplicate():
    pairs = _mk([("same src", "one"), ("same src", "two"), ("other", "one")])
    kept_pair, _ = dedup_exact(pairs, MODE_PAIR)
    assert len(kept_pair) == 3
    kept_src, _ = dedup_exact(pairs, MODE_SRC_ONLY)
    assert [p.index for p in kept_src] == [0, 2]
    kept_tgt, _ = dedup_exact(pairs, MODE_TGT_ONLY)
    assert [p.index for p in kept_tgt] == [0, 1]


def test_whitespace_variants_are_duplicates():
    pairs = _mk([("a  b", "x"), ("a b", "x "), (" a b ", "x")])
    kept, removed = dedup_exact(pairs)
    assert len(kept) == 1 and removed == 2


def test_shard_count_does_not_change_results():
    rng = random.Random(31)
    base = [("s%d" % rng.randrange(200), "t%d" % rng.randrange(200)) for _ in range(2000)]
    pairs = _mk(base)
    reference = dedup_exact(pairs, shards=1)
    for shards in (2, 8, 64):
        got = dedup_exact(pairs, shards=shards)
        assert got == reference, shards


def test_strict_agrees_with_fingerprints():
    rng = random.Random(17)
    pairs = _mk([("s%d" % rng.randrange(50), "t%d" % rng.randrange(50)) for _ in range(800)])
    fast, fast_removed = dedup_exact(pairs, strict=False)
    slow, slow_removed = dedup_exact(pairs, strict=True)
    assert fast == slow and fast_removed == slow_removed


def test_idempotent():
    rng = random.Random(5)
    pairs = _mk([("s%d" % rng.randrange(30), "t") for _ in range(300)])
    once, removed = dedup_exact(pairs)
    twice, removed_again = dedup_exact(once)
    assert twice == once and removed_again == 0


def test_on_removed_callback_sees_removed_pairs():
    pairs = _mk([("a", "1"), ("a", "1"), ("b", "2")])
    removed = []
    kept = list(iter_dedup(pairs, on_removed=removed.append))
    assert [p.index for p in kept] == [0, 2]
    assert [p.index for p in removed] == [1]


def test_invalid_shard_count():
    with pytest.raises(BitextError):
        list(iter_dedup([], shards=0))
