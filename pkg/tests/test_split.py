"""Reservoir-sampled dev split: determinism, partition, uniformity."""
from collections import Counter

import pytest

from bitextkit.corpus import BitextError, SentencePair
from bitextkit.split import DEFAULT_DEV_SIZE, DIALECT_DEV_SIZE, SplitSpec, dev_index_set, sample_split


def test_default_sizes_pinned():
    assert DEFAULT_DEV_SIZE == 10000
    assert DIALECT_DEV_SIZE == 6000
    assert SplitSpec().n_dev == DEFAULT_DEV_SIZE
    assert SplitSpec().seed == 0


def test_deterministic_for_seed():
    assert dev_index_set(5000, 100, seed=42) == dev_index_set(5000, 100, seed=42)
    assert dev_index_set(5000, 100, seed=42) != dev_index_set(5000, 100, seed=43)


def test_set_size_and_range():
    chosen = dev_index_set(1000, 64, seed=9)
    assert len(chosen) == 64
    assert all(0 <= i < 1000 for i in chosen)


def test_edge_sizes():
    assert dev_index_set(10, 0, seed=1) == frozenset()
    assert dev_index_set(10, 10, seed=1) == frozenset(range(10))
    assert dev_index_set(0, 0, seed=1) == frozenset()


def test_invalid_sizes():
    with pytest.raises(BitextError):
        dev_index_set(5, 6, seed=0)
    with pytest.raises(BitextError):
        dev_index_set(5, -1, seed=0)


def test_sample_split_partitions_in_order():
    pairs = [SentencePair(f"s{i}", f"t{i}", index=i) for i in range(50)]
    train, dev = sample_split(pairs, SplitSpec(n_dev=12, seed=3))
    assert len(train) == 38 and len(dev) == 12
    merged = sorted(train + dev, key=lambda p: p.index)
    assert merged == pairs
    # both halves preserve input order
    assert [p.index for p in train] == sorted(p.index for p in train)
    assert [p.index for p in dev] == sorted(p.index for p in dev)


def test_sample_split_accepts_iterators():
    train, dev = sample_split((SentencePair(f"s{i}", "t", index=i) for i in range(20)), SplitSpec(n_dev=5, seed=0))
    assert len(train) == 15 and len(dev) == 5


def test_selection_is_roughly_uniform():
    # n=10, n_dev=1 over many seeds: each index should land near 1/10
    hits = Counter()
    trials = 10000
    for seed in range(trials):
        (only,) = dev_index_set(10, 1, seed)
        hits[only] += 1
    assert set(hits) == set(range(10))
    for index in range(10):
        assert abs(hits[index] - trials / 10) < 150, (index, hits[index])
