"""Binary MSA/DA classifier: multinomial naive Bayes over character trigrams.

Features come from normalized text (NFC, diacritics stripped, entities
masked, whitespace collapsed). Add-1 smoothing over the training vocabulary;
ties resolve to MSA. A trained stand-in for corpus composition reporting, not
a research-grade dialect identifier.
"""
from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable

from .corpus import BitextError
from .normalize import mask_entities, strip_diacritics

LABEL_MSA = "MSA"
LABEL_DA = "DA"
LABELS = (LABEL_MSA, LABEL_DA)
DEFAULT_ORDER = 3

_WS_RUN = re.compile(r"\s+")
_HEADER_RE = re.compile(r"^#dialect v1 order=(\d+)$")
_CLASS_RE = re.compile(r"^#class\t(MSA|DA)\t(\d+)$")


def _normalize_for_id(text: str) -> str:
    if not unicodedata.is_normalized("NFC", text):
        text = unicodedata.normalize("NFC", text)
    return _WS_RUN.sub(" ", mask_entities(strip_diacritics(text))).strip()


def _features(text: str, order: int) -> list[str]:
    normalized = _normalize_for_id(text)
    return [normalized[i : i + order] for i in range(len(normalized) - order + 1)]


@dataclass
class DialectModel:
    order: int
    class_sentences: dict[str, int]
    gram_counts: dict[str, dict[str, int]]  # label -> gram -> count
    class_totals: dict[str, int]
    vocab_size: int


def _finalize(order: int, class_sentences: dict[str, int], gram_counts: dict[str, dict[str, int]]) -> DialectModel:
    totals = {label: sum(gram_counts[label].values()) for label in LABELS}
    vocab: set[str] = set()
    for label in LABELS:
        vocab.update(gram_counts[label])
    return DialectModel(order, class_sentences, gram_counts, totals, len(vocab))


def train_dialect(
    msa_sentences: Iterable[str],
    da_sentences: Iterable[str],
    order: int = DEFAULT_ORDER,
) -> DialectModel:
    if order < 1:
        raise BitextError(f"n-gram order must be >= 1, got {order}")
    gram_counts: dict[str, dict[str, int]] = {LABEL_MSA: {}, LABEL_DA: {}}
    class_sentences = {LABEL_MSA: 0, LABEL_DA: 0}
    for label, sentences in ((LABEL_MSA, msa_sentences), (LABEL_DA, da_sentences)):
        grams = gram_counts[label]
        for sentence in sentences:
            class_sentences[label] += 1
            for gram in _features(sentence, order):
                grams[gram] = grams.get(gram, 0) + 1
    if class_sentences[LABEL_MSA] == 0 or class_sentences[LABEL_DA] == 0:
        raise BitextError("training needs at least one sentence per class")
    return _finalize(order, class_sentences, gram_counts)


def classify(model: DialectModel, text: str) -> tuple[str, float]:
    """Label plus the MSA-minus-DA log-odds. Empty feature sets fall back to
    the prior; exact ties go to MSA."""
    total_sentences = model.class_sentences[LABEL_MSA] + model.class_sentences[LABEL_DA]
    log_msa = math.log(model.class_sentences[LABEL_MSA] / total_sentences)
    log_da = math.log(model.class_sentences[LABEL_DA] / total_sentences)
    grams = _features(text, model.order)
    if grams:
        vocab = model.vocab_size
        msa_grams = model.gram_counts[LABEL_MSA]
        da_grams = model.gram_counts[LABEL_DA]
        msa_denom = model.class_totals[LABEL_MSA] + vocab
        da_denom = model.class_totals[LABEL_DA] + vocab
        for gram in grams:
            log_msa += math.log((msa_grams.get(gram, 0) + 1) / msa_denom)
            log_da += math.log((da_grams.get(gram, 0) + 1) / da_denom)
    log_odds = log_msa - log_da
    return (LABEL_MSA if log_odds >= 0 else LABEL_DA, log_odds)


@dataclass(frozen=True)
class DialectDistribution:
    total: int
    msa_count: int
    da_count: int
    msa_percent: float
    da_percent: float


def distribution_report(model: DialectModel, sentences: Iterable[str]) -> DialectDistribution:
    """Corpus-level label distribution. Percentages are rounded half-up to two
    decimals, and the DA share is the exact complement, so they always sum to
    100.00."""
    total = 0
    msa = 0
    for sentence in sentences:
        total += 1
        if classify(model, sentence)[0] == LABEL_MSA:
            msa += 1
    if total == 0:
        raise BitextError("empty corpus: nothing to classify")
    msa_dec = (Decimal(100 * msa) / Decimal(total)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    da_dec = Decimal("100.00") - msa_dec
    return DialectDistribution(total, msa, total - msa, float(msa_dec), float(da_dec))


def dumps_dialect(model: DialectModel) -> str:
    lines = [f"#dialect v1 order={model.order}"]
    for label in LABELS:
        lines.append(f"#class\t{label}\t{model.class_sentences[label]}")
    for label in LABELS:
        grams = model.gram_counts[label]
        for gram in sorted(grams):
            lines.append(f"{label}\t{gram}\t{grams[gram]}")
    return "\n".join(lines) + "\n"


def loads_dialect(text: str) -> DialectModel:
    lines = text.splitlines()
    if not lines:
        raise BitextError("empty dialect model")
    header = _HEADER_RE.match(lines[0])
    if header is None:
        raise BitextError(f"bad dialect model header: {lines[0]!r}")
    order = int(header.group(1))
    if order < 1:
        raise BitextError(f"n-gram order must be >= 1, got {order}")
    class_sentences: dict[str, int] = {}
    gram_counts: dict[str, dict[str, int]] = {LABEL_MSA: {}, LABEL_DA: {}}
    for lineno, line in enumerate(lines[1:], start=1):
        if line.startswith("#class\t"):
            match = _CLASS_RE.match(line)
            if match is None:
                raise BitextError(f"malformed class line {lineno}: {line!r}")
            label = match.group(1)
            if label in class_sentences:
                raise BitextError(f"duplicate class line for {label} at line {lineno}")
            class_sentences[label] = int(match.group(2))
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise BitextError(f"expected 3 tab-separated fields at line {lineno}")
        label, gram, count_text = parts
        if label not in LABELS:
            raise BitextError(f"unknown label {label!r} at line {lineno}")
        try:
            count = int(count_text)
        except ValueError:
            raise BitextError(f"malformed count at line {lineno}") from None
        if count < 1:
            raise BitextError(f"non-positive count at line {lineno}")
        if gram in gram_counts[label]:
            raise BitextError(f"duplicate gram at line {lineno}")
        gram_counts[label][gram] = count
    if set(class_sentences) != set(LABELS):
        raise BitextError("model must declare sentence counts for both MSA and DA")
    if class_sentences[LABEL_MSA] == 0 or class_sentences[LABEL_DA] == 0:
        raise BitextError("model needs at least one training sentence per class")
    return _finalize(order, class_sentences, gram_counts)


def save_dialect(model: DialectModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(dumps_dialect(model))


def load_dialect(path: str | Path) -> DialectModel:
    with open(path, "r", encoding="utf-8") as handle:
        return loads_dialect(handle.read())
