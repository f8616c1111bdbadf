"""Unigram truecaser with separate sentence-initial counts.

Sentence-initial evidence is recorded apart from mid-sentence evidence, so
words only ever seen capitalized at position 0 do not force capitalization
everywhere. Applying restores each token's most frequent non-initial surface
form; tokens seen only sentence-initially fall back to the all-position
argmax; unknown tokens pass through; ties go to the lexicographically
smallest form.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import BitextError

# counts cell layout per surface form
_NON_INITIAL = 0
_INITIAL = 1


@dataclass
class TruecaseModel:
    counts: dict[str, dict[str, list[int]]]  # lower -> form -> [non_initial, initial]


def train_truecaser(sentences: Iterable[Sequence[str]]) -> TruecaseModel:
    counts: dict[str, dict[str, list[int]]] = {}
    saw_token = False
    for sentence in sentences:
        for position, token in enumerate(sentence):
            saw_token = True
            forms = counts.setdefault(token.lower(), {})
            cell = forms.setdefault(token, [0, 0])
            cell[_INITIAL if position == 0 else _NON_INITIAL] += 1
    if not saw_token:
        raise BitextError("empty training corpus")
    return TruecaseModel(counts)


def _best_form(forms: dict[str, list[int]]) -> str:
    top_non_initial = max(cell[_NON_INITIAL] for cell in forms.values())
    if top_non_initial > 0:
        candidates = [f for f, cell in forms.items() if cell[_NON_INITIAL] == top_non_initial]
    else:
        top_total = max(cell[_NON_INITIAL] + cell[_INITIAL] for cell in forms.values())
        candidates = [f for f, cell in forms.items() if cell[_NON_INITIAL] + cell[_INITIAL] == top_total]
    return min(candidates)


def apply_truecase(model: TruecaseModel, tokens: Sequence[str]) -> list[str]:
    """Restore casing for a lowercased token sequence; length is preserved."""
    decided: dict[str, str] = {}
    out: list[str] = []
    for token in tokens:
        key = token.lower()
        form = decided.get(key)
        if form is None:
            forms = model.counts.get(key)
            if forms is None:
                out.append(token)  # unknown: pass through unchanged
                continue
            form = _best_form(forms)
            decided[key] = form
        out.append(form)
    return out


def dumps_truecaser(model: TruecaseModel) -> str:
    lines = []
    for lower in sorted(model.counts):
        for form in sorted(model.counts[lower]):
            if "\t" in form or "\n" in form:
                raise BitextError(f"form {form!r} contains tab or newline; cannot serialize")
            cell = model.counts[lower][form]
            lines.append(f"{lower}\t{form}\t{cell[_NON_INITIAL]}\t{cell[_INITIAL]}")
    return "\n".join(lines) + "\n"


def loads_truecaser(text: str) -> TruecaseModel:
    counts: dict[str, dict[str, list[int]]] = {}
    lines = [line for line in text.splitlines() if line]
    if not lines:
        raise BitextError("empty truecase model")
    for lineno, line in enumerate(lines):
        parts = line.split("\t")
        if len(parts) != 4:
            raise BitextError(f"expected 4 tab-separated fields at line {lineno}")
        lower, form, non_initial_text, initial_text = parts
        try:
            non_initial = int(non_initial_text)
            initial = int(initial_text)
        except ValueError:
            raise BitextError(f"malformed count at line {lineno}") from None
        if non_initial < 0 or initial < 0:
            raise BitextError(f"negative count at line {lineno}")
        if form.lower() != lower:
            raise BitextError(f"line {lineno}: form {form!r} does not lowercase to {lower!r}")
        forms = counts.setdefault(lower, {})
        if form in forms:
            raise BitextError(f"duplicate entry for {form!r} at line {lineno}")
        forms[form] = [non_initial, initial]
    return TruecaseModel(counts)


def save_truecaser(model: TruecaseModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(dumps_truecaser(model))


def load_truecaser(path: str | Path) -> TruecaseModel:
    with open(path, "r", encoding="utf-8") as handle:
        return loads_truecaser(handle.read())
