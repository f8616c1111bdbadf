"""Pair quality filters: similarity band and word n-gram containment.

Scoring is pluggable. The production path reads precomputed sentence
embeddings from sidecar files; the lexical overlap surrogate keeps the filter
testable without any embedding model. Both map into [0, 1].
"""
from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .corpus import BitextError, SentencePair
from .normalize import mask_entities, strip_diacritics, tokenize

DEFAULT_BAND_LOW = 0.30
DEFAULT_BAND_HIGH = 0.99
DEFAULT_CONTAINMENT_THRESHOLD = 0.75
DEFAULT_CONTAINMENT_ORDER = 3

SCORER_LEXICAL = "lexical"
SCORER_SIDECAR = "sidecar"
SCORERS = (SCORER_LEXICAL, SCORER_SIDECAR)

# Removal is strictly > threshold; ties are kept.  Default sweep grid spans
# the useful range in 0.05 steps.
SWEEP_THRESHOLDS = tuple(round(0.30 + 0.05 * i, 2) for i in range(13))


def qa_tokens(text: str) -> list[str]:
    """Tokens of the masked, diacritic-stripped, NFC view of ``text``."""
    if not unicodedata.is_normalized("NFC", text):
        text = unicodedata.normalize("NFC", text)
    return tokenize(mask_entities(strip_diacritics(text)))


def normalize_pair(pair: SentencePair) -> SentencePair:
    """Both sides diacritic-stripped and entity-masked; index and provenance
    carry over."""
    src = mask_entities(strip_diacritics(pair.src))
    tgt = mask_entities(strip_diacritics(pair.tgt))
    if src == pair.src and tgt == pair.tgt:
        return pair
    return SentencePair(src, tgt, index=pair.index, provenance=pair.provenance, meta=pair.meta)


def lexical_overlap_score(src: str, tgt: str) -> float:
    """Token-set overlap coefficient; 0.0 when either side has no tokens."""
    a = set(qa_tokens(src))
    b = set(qa_tokens(tgt))
    if not a or not b:
        return 0.0
    return len(a & b) / min(len(a), len(b))


def cosine_pair_score(src_vec: Sequence[float], tgt_vec: Sequence[float]) -> float:
    """Cosine similarity mapped affinely onto [0, 1] via (c + 1) / 2."""
    if len(src_vec) != len(tgt_vec):
        raise BitextError(f"vector dimension mismatch: {len(src_vec)} vs {len(tgt_vec)}")
    dot = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for x, y in zip(src_vec, tgt_vec):
        dot += x * y
        norm_a += x * x
        norm_b += y * y
    if norm_a == 0.0 or norm_b == 0.0:
        raise BitextError("zero vector has no direction; cannot score")
    cos = dot / math.sqrt(norm_a * norm_b)
    return min(1.0, max(0.0, (cos + 1.0) / 2.0))


class SidecarScorer:
    """Scores pairs from two line-aligned vector files (one row per pair index).

    Rows are consumed forward-only; pairs must arrive in increasing index
    order. Rows skipped by upstream filters are discarded to stay aligned.
    """

    def __init__(self, src_path: str | Path, tgt_path: str | Path) -> None:
        self._src = open(src_path, "r", encoding="utf-8")
        self._tgt = open(tgt_path, "r", encoding="utf-8")
        self._src_path = str(src_path)
        self._tgt_path = str(tgt_path)
        self._row = 0

    def close(self) -> None:
        self._src.close()
        self._tgt.close()

    def _next_row(self) -> tuple[list[float], list[float]]:
        src_line = self._src.readline()
        tgt_line = self._tgt.readline()
        if not src_line or not tgt_line:
            raise BitextError(f"missing sidecar vector row {self._row}")
        try:
            src_vec = [float(x) for x in src_line.split()]
            tgt_vec = [float(x) for x in tgt_line.split()]
        except ValueError:
            raise BitextError(f"malformed sidecar vector at row {self._row}") from None
        self._row += 1
        return src_vec, tgt_vec

    def score(self, pair: SentencePair) -> float:
        if pair.index < self._row:
            raise BitextError(f"sidecar rows are forward-only; pair index {pair.index} already passed")
        while self._row < pair.index:
            self._next_row()
        src_vec, tgt_vec = self._next_row()
        try:
            return cosine_pair_score(src_vec, tgt_vec)
        except BitextError as exc:
            raise BitextError(f"row {self._row - 1}: {exc}") from None

    def __enter__(self) -> "SidecarScorer":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def _default_scorer(pair: SentencePair) -> float:
    return lexical_overlap_score(pair.src, pair.tgt)


@dataclass
class BandPartition:
    kept: list[SentencePair]
    removed_low: list[SentencePair]
    removed_high: list[SentencePair]


def band_filter(
    pairs: Iterable[SentencePair],
    low: float = DEFAULT_BAND_LOW,
    high: float = DEFAULT_BAND_HIGH,
    scorer: Callable[[SentencePair], float] | None = None,
) -> BandPartition:
    """Keep pairs whose score falls inside [low, high], bounds inclusive."""
    if low > high:
        raise BitextError(f"invalid band: low {low} > high {high}")
    scorer = scorer or _default_scorer
    result = BandPartition([], [], [])
    for pair in pairs:
        score = scorer(pair)
        if score < low:
            result.removed_low.append(pair)
        elif score > high:
            result.removed_high.append(pair)
        else:
            result.kept.append(pair)
    return result


@dataclass(frozen=True)
class OverlapRatio:
    value: float
    n: int  # effective n-gram order after any short-side fallback


def _ngram_set(tokens: Sequence[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def containment_ratio(
    src_tokens: Sequence[str],
    tgt_tokens: Sequence[str],
    n: int = DEFAULT_CONTAINMENT_ORDER,
) -> OverlapRatio:
    """Shared n-gram fraction of the shorter side, set semantics.

    Sides shorter than ``n`` drop the order to min(len(src), len(tgt)); an
    empty side yields 0.0. Symmetric in its arguments: the denominator side is
    the one with fewer tokens (tie: the smaller n-gram set).
    """
    if n < 1:
        raise BitextError(f"n-gram order must be >= 1, got {n}")
    len_src, len_tgt = len(src_tokens), len(tgt_tokens)
    if len_src == 0 or len_tgt == 0:
        return OverlapRatio(0.0, n)
    eff = n if (len_src >= n and len_tgt >= n) else min(len_src, len_tgt)
    src_grams = _ngram_set(src_tokens, eff)
    tgt_grams = _ngram_set(tgt_tokens, eff)
    if len_src < len_tgt:
        denom = len(src_grams)
    elif len_tgt < len_src:
        denom = len(tgt_grams)
    else:
        denom = min(len(src_grams), len(tgt_grams))
    return OverlapRatio(len(src_grams & tgt_grams) / denom, eff)


def pair_containment(pair: SentencePair, n: int = DEFAULT_CONTAINMENT_ORDER) -> OverlapRatio:
    return containment_ratio(qa_tokens(pair.src), qa_tokens(pair.tgt), n)


@dataclass
class ContainmentPartition:
    kept: list[SentencePair]
    removed: list[SentencePair]


def containment_filter(
    pairs: Iterable[SentencePair],
    threshold: float = DEFAULT_CONTAINMENT_THRESHOLD,
    n: int = DEFAULT_CONTAINMENT_ORDER,
) -> ContainmentPartition:
    """Remove pairs whose containment ratio strictly exceeds ``threshold``."""
    if not 0.0 <= threshold <= 1.0:
        raise BitextError(f"containment threshold must be in [0, 1], got {threshold}")
    result = ContainmentPartition([], [])
    for pair in pairs:
        if pair_containment(pair, n).value > threshold:
            result.removed.append(pair)
        else:
            result.kept.append(pair)
    return result


def containment_sweep(
    pairs: Iterable[SentencePair],
    thresholds: Sequence[float] = SWEEP_THRESHOLDS,
    n: int = DEFAULT_CONTAINMENT_ORDER,
) -> list[tuple[float, int]]:
    """Removal counts per threshold; ratios computed once per pair."""
    for threshold in thresholds:
        if not 0.0 <= threshold <= 1.0:
            raise BitextError(f"containment threshold must be in [0, 1], got {threshold}")
    ratios = [pair_containment(pair, n).value for pair in pairs]
    return [(t, sum(1 for r in ratios if r > t)) for t in thresholds]
