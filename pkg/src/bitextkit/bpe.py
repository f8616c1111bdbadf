"""Joint byte-pair encoding: merge learning, application, decoding.

Learning keeps incremental pair statistics (counts plus a pair -> word index)
and selects merges through a lazy max-heap, so large merge budgets stay
tractable. Selection order: highest corpus frequency, ties broken toward the
lexicographically smallest (first, second) pair.
"""
from __future__ import annotations

import heapq
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import BitextError

END_OF_WORD = "</w>"
DEFAULT_NUM_MERGES = 64000
MIN_PAIR_FREQUENCY = 2

_HEADER_RE = re.compile(r"^#bpe v1 merges=(\d+)$")
_WS_RE = re.compile(r"\s")

Pair = tuple[str, str]


@dataclass(frozen=True)
class BpeModel:
    merges: tuple[Pair, ...]
    end_of_word_marker: str = END_OF_WORD

    @property
    def num_merges(self) -> int:
        return len(self.merges)


def token_frequencies(sentences: Iterable[Sequence[str]]) -> Counter[str]:
    """Count token types over tokenized sentences (src and tgt alike)."""
    freqs: Counter[str] = Counter()
    for sentence in sentences:
        freqs.update(sentence)
    return freqs


def _merge_word(symbols: list[str], first: str, second: str, joined: str) -> list[str]:
    # Replace non-overlapping occurrences left to right.
    out: list[str] = []
    i = 0
    last = len(symbols) - 1
    while i < len(symbols):
        if i < last and symbols[i] == first and symbols[i + 1] == second:
            out.append(joined)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def learn_bpe(
    freqs: Mapping[str, int],
    num_merges: int = DEFAULT_NUM_MERGES,
    marker: str = END_OF_WORD,
) -> BpeModel:
    """Learn up to ``num_merges`` merges from a token frequency table.

    Stops early when no adjacent pair reaches frequency 2. Tokens get the
    end-of-word marker appended as a separate final symbol before counting.
    """
    if num_merges < 1:
        raise BitextError(f"num_merges must be >= 1, got {num_merges}")
    if not freqs:
        raise BitextError("empty corpus: no tokens to learn from")
    words: list[list[str]] = []
    counts: list[int] = []
    for token, freq in freqs.items():
        if freq <= 0:
            raise BitextError(f"non-positive frequency for token {token!r}")
        if not token:
            raise BitextError("empty token in frequency table")
        if _WS_RE.search(token):
            raise BitextError(f"token contains whitespace: {token!r}")
        if marker in token:
            raise BitextError(f"token contains reserved marker {marker!r}: {token!r}")
        words.append(list(token) + [marker])
        counts.append(freq)

    pair_freq: dict[Pair, int] = {}
    pair_words: dict[Pair, dict[int, int]] = {}
    for wid, symbols in enumerate(words):
        freq = counts[wid]
        for pair, k in Counter(zip(symbols, symbols[1:])).items():
            pair_freq[pair] = pair_freq.get(pair, 0) + freq * k
            pair_words.setdefault(pair, {})[wid] = k

    # Lazy heap: entries are (-freq, pair); stale entries are dropped when
    # popped by comparing against the live count.
    heap: list[tuple[int, Pair]] = [(-f, p) for p, f in pair_freq.items() if f >= MIN_PAIR_FREQUENCY]
    heapq.heapify(heap)
    merges: list[Pair] = []

    while len(merges) < num_merges:
        best: Pair | None = None
        while heap:
            neg_freq, pair = heap[0]
            if pair_freq.get(pair, 0) == -neg_freq:
                best = pair
                heapq.heappop(heap)
                break
            heapq.heappop(heap)
        if best is None:
            break
        merges.append(best)
        first, second = best
        joined = first + second
        deltas: dict[Pair, int] = {}
        for wid in list(pair_words[best]):
            freq = counts[wid]
            old = words[wid]
            for pair, k in Counter(zip(old, old[1:])).items():
                deltas[pair] = deltas.get(pair, 0) - freq * k
                owners = pair_words[pair]
                del owners[wid]
                if not owners:
                    del pair_words[pair]
            new = _merge_word(old, first, second, joined)
            words[wid] = new
            for pair, k in Counter(zip(new, new[1:])).items():
                deltas[pair] = deltas.get(pair, 0) + freq * k
                pair_words.setdefault(pair, {})[wid] = k
        for pair, delta in deltas.items():
            if delta == 0:
                continue
            updated = pair_freq.get(pair, 0) + delta
            if updated <= 0:
                pair_freq.pop(pair, None)
            else:
                pair_freq[pair] = updated
                if updated >= MIN_PAIR_FREQUENCY:
                    heapq.heappush(heap, (-updated, pair))

    return BpeModel(tuple(merges), marker)


class BpeEncoder:
    """Applies a model's merges to tokens; caches per-token segmentations."""

    _CACHE_LIMIT = 200000

    def __init__(self, model: BpeModel) -> None:
        self._merges = model.merges
        self._ranks: dict[Pair, int] = {pair: rank for rank, pair in enumerate(model.merges)}
        self._marker = model.end_of_word_marker
        self._cache: dict[str, tuple[str, ...]] = {}

    def encode_token(self, token: str) -> tuple[str, ...]:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        if self._marker in token:
            raise BitextError(f"token contains reserved end-of-word marker: {token!r}")
        symbols = list(token) + [self._marker]
        while len(symbols) > 1:
            best_rank: int | None = None
            for i in range(len(symbols) - 1):
                rank = self._ranks.get((symbols[i], symbols[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
            if best_rank is None:
                break
            first, second = self._merges[best_rank]
            symbols = _merge_word(symbols, first, second, first + second)
        result = tuple(symbols)
        if len(self._cache) < self._CACHE_LIMIT:
            self._cache[token] = result
        return result

    def encode(self, tokens: Iterable[str]) -> list[str]:
        out: list[str] = []
        for token in tokens:
            out.extend(self.encode_token(token))
        return out


def apply_bpe(model: BpeModel, tokens: Iterable[str]) -> list[str]:
    """One-shot encode; build a BpeEncoder for corpus-scale reuse."""
    return BpeEncoder(model).encode(tokens)


def decode_bpe(model: BpeModel, symbols: Iterable[str]) -> list[str]:
    """Invert apply_bpe: join symbols and split words at end-of-word markers."""
    text = "".join(symbols)
    if not text:
        return []
    marker = model.end_of_word_marker
    if not text.endswith(marker):
        raise BitextError("dangling subword symbols: stream does not end with the end-of-word marker")
    words = text.split(marker)
    return words[:-1]


def dumps_bpe(model: BpeModel) -> str:
    lines = [f"#bpe v1 merges={len(model.merges)}"]
    lines.extend(f"{first} {second}" for first, second in model.merges)
    return "\n".join(lines) + "\n"


def loads_bpe(text: str) -> BpeModel:
    lines = text.splitlines()
    if not lines:
        raise BitextError("empty model text")
    header = _HEADER_RE.match(lines[0])
    if header is None:
        raise BitextError(f"bad model header: {lines[0]!r}")
    declared = int(header.group(1))
    merges: list[Pair] = []
    seen: set[Pair] = set()
    produced: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=1):
        parts = line.split(" ")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise BitextError(f"malformed merge at line {lineno}: {line!r}")
        pair = (parts[0], parts[1])
        if pair in seen:
            raise BitextError(f"duplicate merge at line {lineno}: {line!r}")
        for part in pair:
            if len(part) > 1 and part != END_OF_WORD and part not in produced:
                raise BitextError(f"line {lineno}: symbol {part!r} not producible by earlier merges")
        seen.add(pair)
        merges.append(pair)
        produced.add(parts[0] + parts[1])
    if len(merges) != declared:
        raise BitextError(f"header declares {declared} merges, file has {len(merges)}")
    return BpeModel(tuple(merges))


def save_bpe(model: BpeModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(dumps_bpe(model))


def load_bpe(path: str | Path) -> BpeModel:
    with open(path, "r", encoding="utf-8") as handle:
        return loads_bpe(handle.read())
