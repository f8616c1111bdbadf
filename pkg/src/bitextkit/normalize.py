"""Normalization: diacritic stripping, entity masking, rule-based tokenization.

The tokenizer is a small deterministic rule set (whitespace split plus edge
punctuation peeling), not a clone of any external tokenizer; downstream
numbers are tied to these rules, so they are frozen and versioned.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field

from .corpus import BitextError

TOKENIZER_VERSION = "rules-v1"

# Arabic short vowels / tanween / shadda / sukun (U+064B..U+065F), the
# superscript alef, and tatweel. The default strip set.
ARABIC_DIACRITICS = frozenset(chr(cp) for cp in range(0x064B, 0x0660)) | frozenset({"ٰ", "ـ"})

_DEFAULT_DELETE = {ord(ch): None for ch in ARABIC_DIACRITICS}

_URL_RE = re.compile(r"(?:https?://|www\.)\S*")
_MENTION_RE = re.compile(r"@+\w+")
_HASHTAG_RE = re.compile(r"#+\w+")


def strip_diacritics(text: str, diacritics: frozenset[str] = ARABIC_DIACRITICS) -> str:
    """Delete every code point in ``diacritics`` from ``text``."""
    if diacritics is ARABIC_DIACRITICS:
        return text.translate(_DEFAULT_DELETE)
    return text.translate({ord(ch): None for ch in diacritics})


@dataclass(frozen=True)
class MaskRules:
    """Replacement tokens plus the combining marks the matcher sees through.

    ``transparent`` marks are invisible to pattern matching and are consumed
    when they fall inside a matched span; that makes masking commute with
    stripping the same marks.
    """

    url_token: str = "URL"
    mention_token: str = "USER"
    hashtag_token: str = "HASHTAG"
    transparent: frozenset[str] = field(default=ARABIC_DIACRITICS)

    def __post_init__(self) -> None:
        for token in (self.url_token, self.mention_token, self.hashtag_token):
            if not token or re.search(r"\s", token):
                raise BitextError(f"replacement token {token!r} must be non-empty and whitespace-free")


DEFAULT_MASK_RULES = MaskRules()


def _sub_transparent(text: str, pattern: re.Pattern[str], token: str, transparent: frozenset[str]) -> str:
    # Match on the skeleton (text minus transparent marks), splice the
    # replacement over the original span covered by the match.
    if not any(ch in transparent for ch in text):
        return pattern.sub(lambda m: token, text)
    positions = [i for i, ch in enumerate(text) if ch not in transparent]
    skeleton = "".join(text[i] for i in positions)
    out: list[str] = []
    cursor = 0
    for match in pattern.finditer(skeleton):
        if match.start() == match.end():
            continue
        start = positions[match.start()]
        end = positions[match.end() - 1] + 1
        out.append(text[cursor:start])
        out.append(token)
        cursor = end
    out.append(text[cursor:])
    return "".join(out)


def mask_entities(text: str, rules: MaskRules = DEFAULT_MASK_RULES) -> str:
    """Replace URLs, @-mentions, and #-hashtags with fixed tokens.

    Substitution order is URL, then mention, then hashtag. Passes repeat to a
    fixpoint so the result is idempotent. Terminates: every change consumes at
    least one sigil or scheme and the replacement tokens contain none.
    """
    while True:
        out = text
        for pattern, token in (
            (_URL_RE, rules.url_token),
            (_MENTION_RE, rules.mention_token),
            (_HASHTAG_RE, rules.hashtag_token),
        ):
            out = _sub_transparent(out, pattern, token, rules.transparent)
        if out == text:
            return out
        text = out


def _is_detachable(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def _split_chunk(chunk: str) -> list[str]:
    start, end = 0, len(chunk)
    while start < end and _is_detachable(chunk[start]):
        start += 1
    while end > start and _is_detachable(chunk[end - 1]):
        end -= 1
    out = list(chunk[:start])
    if start < end:
        out.append(chunk[start:end])
    out.extend(chunk[end:])
    return out


def tokenize(text: str) -> list[str]:
    """Split on Unicode whitespace, then detach leading/trailing punctuation.

    Words never split internally, so decimals like "3.5" and mask tokens
    survive whole. Never yields an empty token.
    """
    tokens: list[str] = []
    for chunk in text.split():
        tokens.extend(_split_chunk(chunk))
    return tokens


# Attach classes for detokenization. Kept disjoint: a token can suppress the
# space on one side only, which keeps tokenize(detokenize(t)) == t for
# tokenizer output.
_ATTACH_LEFT_CHARS = frozenset(".,;:!?%…،؛؟·")
_ATTACH_LEFT_CATEGORIES = ("Pe", "Pf")
_ATTACH_RIGHT_CHARS = frozenset("¿¡#@")
_ATTACH_RIGHT_CATEGORIES = ("Ps", "Pi", "Sc")


def _attaches_left(token: str) -> bool:
    if len(token) != 1:
        return False
    return token in _ATTACH_LEFT_CHARS or unicodedata.category(token) in _ATTACH_LEFT_CATEGORIES


def _attaches_right(token: str) -> bool:
    if len(token) != 1:
        return False
    return token in _ATTACH_RIGHT_CHARS or unicodedata.category(token) in _ATTACH_RIGHT_CATEGORIES


def detokenize(tokens: list[str]) -> str:
    """Join tokens with spaces, reattaching punctuation to its neighbor."""
    parts: list[str] = []
    glue_next = False
    for token in tokens:
        if parts and (glue_next or _attaches_left(token)):
            parts[-1] += token
        else:
            parts.append(token)
        glue_next = _attaches_right(token)
    return " ".join(parts)
