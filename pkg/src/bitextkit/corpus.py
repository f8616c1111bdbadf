"""Corpus data model and streaming bitext I/O.

A bitext is an ordered stream of sentence pairs. Two on-disk layouts are
supported:

* ``tsv``: one pair per line, ``<src>\\t<tgt>\\n``, UTF-8, LF line endings.
* ``split-files``: two line-aligned plain-text files, one side each.

Text is normalized to Unicode NFC at ingest so equality, keys, and
fingerprints downstream never depend on the input's codepoint representation.
Readers are generators and hold O(1) pairs in memory.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

FORMAT_TSV = "tsv"
FORMAT_SPLIT = "split-files"
FORMATS = (FORMAT_TSV, FORMAT_SPLIT)

# Everything str.splitlines() treats as a line break; pair text must stay
# single-line or the writers would corrupt the stream.
_LINE_BREAK_RE = re.compile("[\n\r\x0b\x0c\x1c\x1d\x1e\x85  ]")


class BitextError(Exception):
    """Malformed input data, violated format contracts, or bad parameters."""


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair.

    ``index`` is the 0-based ordinal within its input stream. ``provenance``
    names the originating dataset (a registry key) when known.
    """

    src: str
    tgt: str
    index: int = 0
    provenance: str = ""
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        src = self.src if unicodedata.is_normalized("NFC", self.src) else unicodedata.normalize("NFC", self.src)
        tgt = self.tgt if unicodedata.is_normalized("NFC", self.tgt) else unicodedata.normalize("NFC", self.tgt)
        if _LINE_BREAK_RE.search(src) or _LINE_BREAK_RE.search(tgt):
            raise BitextError(f"pair {self.index}: text contains line-break characters")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "tgt", tgt)


def _iter_decoded_lines(path: str | Path) -> Iterator[str]:
    """Yield decoded lines without their terminator. 0-based error positions."""
    with open(path, "rb") as handle:
        for lineno, raw in enumerate(handle):
            line = raw.rstrip(b"\n")
            if line.endswith(b"\r"):  # tolerate CRLF on read; writers emit LF
                line = line[:-1]
            if lineno == 0 and line.startswith(b"\xef\xbb\xbf"):
                line = line[3:]
            try:
                yield line.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise BitextError(f"{path}: invalid UTF-8 at line {lineno}") from exc


def read_lines(path: str | Path) -> Iterator[str]:
    """Stream decoded text lines (terminators dropped, CRLF and a leading BOM
    tolerated). Decode failures report 0-based line numbers."""
    yield from _iter_decoded_lines(path)


def read_bitext(
    location: str | Path | tuple[str | Path, str | Path],
    fmt: str = FORMAT_TSV,
    provenance: str = "",
) -> Iterator[SentencePair]:
    """Stream sentence pairs from disk.

    ``location`` is a single path for ``tsv``, or a ``(src_path, tgt_path)``
    tuple for ``split-files``. Raises BitextError on malformed lines,
    line-count mismatches, and invalid UTF-8 (all reported with 0-based line
    numbers).
    """
    if fmt == FORMAT_TSV:
        if isinstance(location, tuple):
            raise BitextError("tsv format takes a single path")
        yield from _read_tsv(location, provenance)
    elif fmt == FORMAT_SPLIT:
        if not (isinstance(location, tuple) and len(location) == 2):
            raise BitextError("split-files format takes a (src_path, tgt_path) tuple")
        yield from _read_split(location[0], location[1], provenance)
    else:
        raise BitextError(f"unknown bitext format: {fmt!r}")


def _read_tsv(path: str | Path, provenance: str) -> Iterator[SentencePair]:
    for lineno, line in enumerate(_iter_decoded_lines(path)):
        if line.count("\t") != 1:
            raise BitextError(f"{path}: expected exactly one tab at line {lineno}, found {line.count(chr(9))}")
        src, tgt = line.split("\t")
        yield SentencePair(src, tgt, index=lineno, provenance=provenance)


def _read_split(src_path: str | Path, tgt_path: str | Path, provenance: str) -> Iterator[SentencePair]:
    src_lines = _iter_decoded_lines(src_path)
    tgt_lines = _iter_decoded_lines(tgt_path)
    index = 0
    while True:
        src = next(src_lines, None)
        tgt = next(tgt_lines, None)
        if src is None and tgt is None:
            return
        if src is None or tgt is None:
            raise BitextError(f"line-count mismatch at line {index}: {src_path} vs {tgt_path}")
        yield SentencePair(src, tgt, index=index, provenance=provenance)
        index += 1


def write_bitext(
    pairs: Iterable[SentencePair],
    location: str | Path | tuple[str | Path, str | Path],
    fmt: str = FORMAT_TSV,
) -> int:
    """Write pairs to disk in the named format; returns the pair count.

    tsv refuses text containing tabs (the format cannot represent it);
    split-files has no such restriction.
    """
    if fmt == FORMAT_TSV:
        if isinstance(location, tuple):
            raise BitextError("tsv format takes a single path")
        count = 0
        with open(location, "w", encoding="utf-8", newline="\n") as out:
            for pair in pairs:
                if "\t" in pair.src or "\t" in pair.tgt:
                    raise BitextError(f"pair {pair.index}: tab in text cannot be written as tsv")
                out.write(f"{pair.src}\t{pair.tgt}\n")
                count += 1
        return count
    if fmt == FORMAT_SPLIT:
        if not (isinstance(location, tuple) and len(location) == 2):
            raise BitextError("split-files format takes a (src_path, tgt_path) tuple")
        count = 0
        with open(location[0], "w", encoding="utf-8", newline="\n") as src_out:
            with open(location[1], "w", encoding="utf-8", newline="\n") as tgt_out:
                for pair in pairs:
                    src_out.write(pair.src + "\n")
                    tgt_out.write(pair.tgt + "\n")
                    count += 1
        return count
    raise BitextError(f"unknown bitext format: {fmt!r}")
