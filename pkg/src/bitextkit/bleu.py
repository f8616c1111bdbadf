"""Corpus-level BLEU: clipped modified n-gram precisions with brevity penalty.

Single reference per hypothesis. No smoothing by default; an add-one mode
exists for tiny dev sets and is flagged in the report.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .corpus import BitextError
from .normalize import TOKENIZER_VERSION

DEFAULT_MAX_ORDER = 4
SMOOTHING_NONE = "none"
SMOOTHING_ADD_ONE = "add-one"
SMOOTHING_MODES = (SMOOTHING_NONE, SMOOTHING_ADD_ONE)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(
    hyp_corpus: Sequence[Sequence[str]],
    ref_corpus: Sequence[Sequence[str]],
    n: int,
) -> tuple[int, int]:
    """Corpus totals (clipped matches, candidate n-grams) at order n."""
    if len(hyp_corpus) != len(ref_corpus):
        raise BitextError(f"corpus length mismatch: {len(hyp_corpus)} hypotheses vs {len(ref_corpus)} references")
    if n < 1:
        raise BitextError(f"n-gram order must be >= 1, got {n}")
    clipped = 0
    total = 0
    for hyp, ref in zip(hyp_corpus, ref_corpus):
        hyp_counts = _ngram_counts(hyp, n)
        if not hyp_counts:
            continue
        total += sum(hyp_counts.values())
        ref_counts = _ngram_counts(ref, n)
        for gram, count in hyp_counts.items():
            clipped += min(count, ref_counts.get(gram, 0))
    return clipped, total


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    """1 when the hypothesis is not shorter; exp(1 - ref/hyp) otherwise."""
    if hyp_len == 0:
        return 0.0
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / hyp_len)


@dataclass(frozen=True)
class BleuReport:
    precisions: tuple[tuple[int, int], ...]  # (clipped, total) per order
    brevity_penalty: float
    score: float  # 0..100
    hyp_len: int
    ref_len: int
    smoothing: str
    tokenizer: str = TOKENIZER_VERSION
    note: str = ""


def corpus_bleu(
    hyp_corpus: Sequence[Sequence[str]],
    ref_corpus: Sequence[Sequence[str]],
    max_order: int = DEFAULT_MAX_ORDER,
    lowercase: bool = False,
    smoothing: str = SMOOTHING_NONE,
) -> BleuReport:
    """Score a tokenized corpus against its aligned references.

    Case-sensitive unless ``lowercase``. With no smoothing, any order with
    zero clipped matches gives score 0.0; orders with no candidate n-grams at
    all (every hypothesis shorter than n) also give 0.0, with a note instead
    of a crash. Add-one smoothing scores (clipped+1)/(total+1) at every order.
    """
    if smoothing not in SMOOTHING_MODES:
        raise BitextError(f"unknown smoothing mode: {smoothing!r}")
    if max_order < 1:
        raise BitextError(f"max_order must be >= 1, got {max_order}")
    if len(hyp_corpus) != len(ref_corpus):
        raise BitextError(f"corpus length mismatch: {len(hyp_corpus)} hypotheses vs {len(ref_corpus)} references")
    if lowercase:
        hyp_corpus = [[t.lower() for t in sent] for sent in hyp_corpus]
        ref_corpus = [[t.lower() for t in sent] for sent in ref_corpus]
    hyp_len = sum(len(sent) for sent in hyp_corpus)
    ref_len = sum(len(sent) for sent in ref_corpus)
    precisions = tuple(modified_precision(hyp_corpus, ref_corpus, n) for n in range(1, max_order + 1))
    bp = brevity_penalty(hyp_len, ref_len)

    note = ""
    if smoothing == SMOOTHING_ADD_ONE:
        ratios = [(clipped + 1) / (total + 1) for clipped, total in precisions]
    else:
        ratios = []
        for n, (clipped, total) in enumerate(precisions, start=1):
            if total == 0:
                note = f"no candidate n-grams at order {n}"
                break
            if clipped == 0:
                note = f"zero n-gram matches at order {n}"
                break
            ratios.append(clipped / total)
    if len(ratios) < max_order or bp == 0.0:
        score = 0.0
        if bp == 0.0 and not note:
            note = "empty hypothesis corpus"
    else:
        score = 100.0 * bp * math.exp(math.fsum(math.log(r) for r in ratios) / max_order)
    return BleuReport(
        precisions=precisions,
        brevity_penalty=bp,
        score=score,
        hyp_len=hyp_len,
        ref_len=ref_len,
        smoothing=smoothing,
        note=note,
    )


def report_text(report: BleuReport) -> str:
    """Human-readable key = value block."""
    precisions = " ".join(f"{c}/{t}" for c, t in report.precisions)
    lines = [
        f"score = {report.score:.2f}",
        f"brevity_penalty = {report.brevity_penalty:.4f}",
        f"precisions = {precisions}",
        f"hyp_len = {report.hyp_len}",
        f"ref_len = {report.ref_len}",
        f"smoothing = {report.smoothing}",
        f"tokenizer = {report.tokenizer}",
    ]
    if report.note:
        lines.append(f"note = {report.note}")
    return "\n".join(lines) + "\n"


def report_json(report: BleuReport) -> str:
    payload = {
        "score": report.score,
        "brevity_penalty": report.brevity_penalty,
        "precisions": [[c, t] for c, t in report.precisions],
        "hyp_len": report.hyp_len,
        "ref_len": report.ref_len,
        "smoothing": report.smoothing,
        "tokenizer": report.tokenizer,
        "note": report.note,
    }
    return json.dumps(payload, sort_keys=True) + "\n"
