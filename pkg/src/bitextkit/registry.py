"""Dataset registry: named corpora with declared sizes and dialect regions.

Metadata only. Declared sizes are whatever the dataset's release announced;
nothing here validates them against files on disk.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import BitextError

REGIONS = ("MSA", "Egyptian", "Levantine", "Gulf", "other")

_COLUMNS = ("name", "src_lang", "tgt_lang", "size", "region")


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    src_lang: str
    tgt_lang: str
    declared_size: int
    dialect_region: str


def _parse_manifest(text: str, origin: str) -> dict[str, DatasetEntry]:
    entries: dict[str, DatasetEntry] = {}
    header_seen = False
    for lineno, line in enumerate(text.splitlines()):
        line = line.strip("\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if not header_seen:
            if tuple(fields) != _COLUMNS:
                raise BitextError(f"{origin}: bad header at line {lineno}, expected {'/'.join(_COLUMNS)}")
            header_seen = True
            continue
        if len(fields) != len(_COLUMNS):
            raise BitextError(f"{origin}: expected {len(_COLUMNS)} columns at line {lineno}")
        name, src_lang, tgt_lang, size_text, region = fields
        try:
            size = int(size_text)
        except ValueError:
            raise BitextError(f"{origin}: malformed size {size_text!r} at line {lineno}") from None
        if size < 0:
            raise BitextError(f"{origin}: negative size at line {lineno}")
        if region not in REGIONS:
            raise BitextError(f"{origin}: unknown region {region!r} at line {lineno}")
        if name in entries:
            raise BitextError(f"{origin}: duplicate dataset name {name!r} at line {lineno}")
        entries[name] = DatasetEntry(name, src_lang, tgt_lang, size, region)
    if not header_seen:
        raise BitextError(f"{origin}: missing header line")
    return entries


def load_registry(path: str | Path | None = None) -> dict[str, DatasetEntry]:
    """Load a manifest; defaults to the bundled one. Preserves file order."""
    if path is None:
        text = resources.files("bitextkit.data").joinpath("datasets.tsv").read_text("utf-8")
        return _parse_manifest(text, "bundled datasets.tsv")
    return _parse_manifest(Path(path).read_text("utf-8"), str(path))


def registry_lookup(name: str, registry: dict[str, DatasetEntry] | None = None) -> DatasetEntry:
    registry = load_registry() if registry is None else registry
    try:
        return registry[name]
    except KeyError:
        raise BitextError(f"unknown dataset name: {name!r}") from None


def region_totals(registry: dict[str, DatasetEntry] | None = None) -> dict[str, int]:
    """Sum of declared sizes per dialect region."""
    registry = load_registry() if registry is None else registry
    totals: dict[str, int] = {}
    for entry in registry.values():
        totals[entry.dialect_region] = totals.get(entry.dialect_region, 0) + entry.declared_size
    return totals
