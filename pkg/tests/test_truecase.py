"""Truecaser: counting, form selection, model file format."""
import random

import pytest

from bitextkit.corpus import BitextError
from bitextkit.truecase import (
    apply_truecase,
    dumps_truecaser,
    load_truecaser,
    loads_truecaser,
    save_truecaser,
    train_truecaser,
)

TRAIN = [
    ["Cairo", "is", "big", "."],
    ["I", "saw", "Cairo", "."],
]


def test_counts_split_by_position():
    model = train_truecaser(TRAIN)
    assert model.counts["cairo"]["Cairo"] == [1, 1]  # one non-initial, one initial
    assert model.counts["is"]["is"] == [1, 0]
    assert model.counts["i"]["I"] == [0, 1]


def test_apply_prefers_non_initial_evidence():
    model = train_truecaser(TRAIN)
    assert apply_truecase(model, ["cairo", "IS", "big"]) == ["Cairo", "is", "big"]


def test_initial_only_types_fall_back_to_all_positions():
    model = train_truecaser(TRAIN)
    # "I" was only ever sentence-initial; the fallback still recovers it
    assert apply_truecase(model, ["i"]) == ["I"]


def test_unknown_tokens_pass_through():
    model = train_truecaser(TRAIN)
    assert apply_truecase(model, ["Unseen", "wOrd"]) == ["Unseen", "wOrd"]


def test_tie_breaks_are_lexicographic():
    model = train_truecaser([["x", "Aa"], ["y", "aA"]])
    assert apply_truecase(model, ["aa"]) == ["Aa"]


def test_case_variants_compete():
    sentences = [["pad", "USA"]] * 3 + [["pad", "Usa"]] * 2
    model = train_truecaser(sentences)
    assert apply_truecase(model, ["usa"]) == ["USA"]


def test_empty_training_rejected():
    with pytest.raises(BitextError, match="empty"):
        train_truecaser([])
    with pytest.raises(BitextError, match="empty"):
        train_truecaser([[], []])


def test_recovers_unique_casings():
    rng = random.Random(88)
    types = ["Word%02d" % i if i % 3 else "WORD%02d" % i for i in range(60)]
    sentences = []
    for _ in range(200):
        sentences.append(["filler"] + rng.sample(types, 5))
    model = train_truecaser(sentences)
    sample = rng.sample(types, 30)
    assert apply_truecase(model, [t.lower() for t in sample]) == sample


def test_model_file_round_trip(tmp_path):
    model = train_truecaser(TRAIN)
    text = dumps_truecaser(model)
    assert loads_truecaser(text).counts == model.counts
    path = tmp_path / "tc.model"
    save_truecaser(model, path)
    assert load_truecaser(path).counts == model.counts


def test_dump_is_sorted_and_tab_separated():
    model = train_truecaser([["Beta", "alpha"], ["alpha", "Beta"]])
    lines = dumps_truecaser(model).splitlines()
    assert lines == sorted(lines)
    assert all(len(line.split("\t")) == 4 for line in lines)


@pytest.mark.parametrize(
    "text",
    [
        "",                                  # empty model
        "cairo\tCairo\t1\n",                 # missing field
        "cairo\tCairo\t1\t2\t3\n",           # extra field
        "cairo\tCairo\t-1\t0\n",             # negative count
        "cairo\tCairo\tx\t0\n",              # non-integer
        "cairo\tMadrid\t1\t0\n",             # form does not lower to key
        "cairo\tCairo\t1\t0\ncairo\tCairo\t2\t0\n",  # duplicate row
    ],
)
def test_loads_rejects_malformed(text):
    with pytest.raises(BitextError):
        loads_truecaser(text)
