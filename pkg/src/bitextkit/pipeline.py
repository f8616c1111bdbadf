"""Streaming pipeline: flat config, funnel accounting, orchestration.

A run makes one streaming pass for the per-pair stages (normalize, band,
containment, dedup), then optional split and BPE phases that re-read the
staged output files. Every output is written to a temp name and renamed only
after the whole run succeeds, so an interrupted run leaves no partial
outputs behind. Given identical config and inputs, all data outputs are
byte-identical across reruns and worker counts; the funnel report differs
only in its wall-time fields.
"""
from __future__ import annotations

import json
import os
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .bpe import DEFAULT_NUM_MERGES, learn_bpe, save_bpe
from .corpus import (
    FORMAT_SPLIT,
    FORMAT_TSV,
    FORMATS,
    BitextError,
    SentencePair,
    read_bitext,
)
from .dedup import MODE_PAIR, MODES, canonical_key, fingerprint
from .normalize import TOKENIZER_VERSION, tokenize
from .qa import (
    DEFAULT_BAND_HIGH,
    DEFAULT_BAND_LOW,
    DEFAULT_CONTAINMENT_ORDER,
    DEFAULT_CONTAINMENT_THRESHOLD,
    SCORER_LEXICAL,
    SCORER_SIDECAR,
    SCORERS,
    SidecarScorer,
    lexical_overlap_score,
    normalize_pair,
    pair_containment,
)
from .split import DEFAULT_DEV_SIZE, dev_index_set

STAGE_NORMALIZE = "normalize"
STAGE_BAND = "band"
STAGE_CONTAINMENT = "containment"
STAGE_DEDUP = "dedup"
STAGE_SPLIT = "split"
STAGE_BPE = "bpe"
PAIR_STAGES = (STAGE_NORMALIZE, STAGE_BAND, STAGE_CONTAINMENT, STAGE_DEDUP)
KNOWN_STAGES = PAIR_STAGES + (STAGE_SPLIT, STAGE_BPE)
DEFAULT_STAGES = (STAGE_BAND, STAGE_CONTAINMENT, STAGE_DEDUP)

PRESET_MSA_ONLY = "msa-only"
PRESET_MSA_PLUS_DA = "msa-plus-da"
PRESETS = (PRESET_MSA_ONLY, PRESET_MSA_PLUS_DA)


@dataclass(frozen=True)
class PipelineConfig:
    input_path: str = ""
    input_tgt_path: str = ""  # second file for split-files input
    input_format: str = FORMAT_TSV
    output_dir: str = ""
    stages: tuple[str, ...] = DEFAULT_STAGES
    scorer: str = SCORER_LEXICAL
    src_vectors: str = ""
    tgt_vectors: str = ""
    band_low: float = DEFAULT_BAND_LOW
    band_high: float = DEFAULT_BAND_HIGH
    containment_threshold: float = DEFAULT_CONTAINMENT_THRESHOLD
    containment_order: int = DEFAULT_CONTAINMENT_ORDER
    dedup_mode: str = MODE_PAIR
    dev_size: int = DEFAULT_DEV_SIZE
    bpe_merges: int = DEFAULT_NUM_MERGES
    seed: int = 0
    workers: int = 1
    audit: bool = True


def _parse_bool(value: str) -> bool:
    if value == "true":
        return True
    if value == "false":
        return False
    raise ValueError(value)


def _parse_stages(value: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in value.split(",") if s.strip())


# key -> (attribute, parser, serializer); order fixes the canonical file layout
_CONFIG_KEYS: dict[str, tuple[str, Callable[[str], object], Callable[[object], str]]] = {
    "input": ("input_path", str, str),
    "input_tgt": ("input_tgt_path", str, str),
    "format": ("input_format", str, str),
    "output_dir": ("output_dir", str, str),
    "stages": ("stages", _parse_stages, lambda v: ", ".join(v)),
    "scorer": ("scorer", str, str),
    "src_vectors": ("src_vectors", str, str),
    "tgt_vectors": ("tgt_vectors", str, str),
    "band.low": ("band_low", float, repr),
    "band.high": ("band_high", float, repr),
    "containment.threshold": ("containment_threshold", float, repr),
    "containment.order": ("containment_order", int, str),
    "dedup.mode": ("dedup_mode", str, str),
    "split.dev_size": ("dev_size", int, str),
    "bpe.merges": ("bpe_merges", int, str),
    "seed": ("seed", int, str),
    "workers": ("workers", int, str),
    "audit": ("audit", _parse_bool, lambda v: "true" if v else "false"),
}


def parse_config(text: str) -> PipelineConfig:
    """Parse the flat key/value config format. Unknown and duplicate keys are
    rejected; full-line # comments and blank lines are ignored."""
    values: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines()):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise BitextError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _CONFIG_KEYS:
            raise BitextError(f"config line {lineno}: unknown key {key!r}")
        if key in seen:
            raise BitextError(f"config line {lineno}: duplicate key {key!r}")
        seen.add(key)
        attr, parser, _ = _CONFIG_KEYS[key]
        try:
            values[attr] = parser(raw)
        except ValueError:
            raise BitextError(f"config line {lineno}: bad value {raw!r} for {key!r}") from None
    return PipelineConfig(**values)  # type: ignore[arg-type]


def config_text(config: PipelineConfig) -> str:
    """Canonical serialization; parse_config(config_text(c)) == c."""
    lines = []
    for key, (attr, _, serializer) in _CONFIG_KEYS.items():
        lines.append(f"{key} = {serializer(getattr(config, attr))}".rstrip())
    return "\n".join(lines) + "\n"


def validate_config(config: PipelineConfig) -> None:
    """Structural checks; raised problems are prefixed with 'config:'."""
    problems: list[str] = []
    if not config.input_path:
        problems.append("missing input path")
    if not config.output_dir:
        problems.append("missing output_dir")
    if config.input_format not in FORMATS:
        problems.append(f"unknown input format {config.input_format!r}")
    if config.input_format == FORMAT_SPLIT and not config.input_tgt_path:
        problems.append("split-files input needs input_tgt")
    if not config.stages:
        problems.append("empty stage list")
    unknown = [s for s in config.stages if s not in KNOWN_STAGES]
    if unknown:
        problems.append(f"unknown stage name(s): {', '.join(unknown)}")
    if len(set(config.stages)) != len(config.stages):
        problems.append("duplicate stage names")
    pair_part = [s for s in config.stages if s in PAIR_STAGES]
    tail = [s for s in config.stages if s in (STAGE_SPLIT, STAGE_BPE)]
    if config.stages != tuple(pair_part) + tuple(tail):
        problems.append("split/bpe stages must follow the filtering stages")
    if tail == [STAGE_BPE, STAGE_SPLIT]:
        problems.append("bpe must come after split")
    if config.scorer not in SCORERS:
        problems.append(f"unknown scorer {config.scorer!r}")
    if config.scorer == SCORER_SIDECAR and not (config.src_vectors and config.tgt_vectors):
        problems.append("sidecar scorer needs src_vectors and tgt_vectors")
    if config.band_low > config.band_high:
        problems.append(f"invalid band: low {config.band_low} > high {config.band_high}")
    if not 0.0 <= config.containment_threshold <= 1.0:
        problems.append(f"containment threshold {config.containment_threshold} outside [0, 1]")
    if config.containment_order < 1:
        problems.append(f"containment order must be >= 1, got {config.containment_order}")
    if config.dedup_mode not in MODES:
        problems.append(f"unknown dedup mode {config.dedup_mode!r}")
    if config.dev_size < 0:
        problems.append(f"dev size must be >= 0, got {config.dev_size}")
    if STAGE_BPE in config.stages and config.bpe_merges < 1:
        problems.append(f"bpe merges must be >= 1, got {config.bpe_merges}")
    if config.workers < 1:
        problems.append(f"workers must be >= 1, got {config.workers}")
    if problems:
        raise BitextError("config: " + "; ".join(problems))


@dataclass
class StageCount:
    name: str
    input: int
    kept: int
    removed: int
    reasons: dict[str, int]
    seconds: float


@dataclass
class FunnelReport:
    stages: list[StageCount]
    total_input: int
    final_kept: int

    def validate(self) -> None:
        previous = self.total_input
        for stage in self.stages:
            if stage.input != previous:
                raise BitextError(f"funnel broken at {stage.name}: input {stage.input} != upstream kept {previous}")
            if stage.kept + stage.removed != stage.input:
                raise BitextError(f"funnel broken at {stage.name}: kept {stage.kept} + removed {stage.removed} != input {stage.input}")
            if sum(stage.reasons.values()) != stage.removed:
                raise BitextError(f"funnel broken at {stage.name}: reason tally != removed count")
            previous = stage.kept
        if previous != self.final_kept:
            raise BitextError(f"funnel broken: last stage kept {previous} != final {self.final_kept}")


def funnel_table(report: FunnelReport) -> str:
    """Aligned human-readable table; validates before rendering."""
    report.validate()
    header = ("stage", "input", "kept", "removed", "seconds", "reasons")
    rows = [header]
    for stage in report.stages:
        reasons = " ".join(f"{k}={v}" for k, v in sorted(stage.reasons.items())) or "-"
        rows.append((stage.name, str(stage.input), str(stage.kept), str(stage.removed), f"{stage.seconds:.3f}", reasons))
    rows.append(("total", str(report.total_input), str(report.final_kept), str(report.total_input - report.final_kept), "", ""))
    widths = [max(len(row[col]) for row in rows) for col in range(len(header))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[col]) for col, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def funnel_json(report: FunnelReport) -> str:
    """Machine-readable record; parse_funnel inverts it exactly."""
    report.validate()
    payload = {
        "total_input": report.total_input,
        "final_kept": report.final_kept,
        "stages": [
            {
                "name": s.name,
                "input": s.input,
                "kept": s.kept,
                "removed": s.removed,
                "reasons": s.reasons,
                "seconds": s.seconds,
            }
            for s in report.stages
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_funnel(text: str) -> FunnelReport:
    try:
        payload = json.loads(text)
        stages = [
            StageCount(
                name=s["name"],
                input=s["input"],
                kept=s["kept"],
                removed=s["removed"],
                reasons=dict(s["reasons"]),
                seconds=s["seconds"],
            )
            for s in payload["stages"]
        ]
        report = FunnelReport(stages, payload["total_input"], payload["final_kept"])
    except (KeyError, TypeError, ValueError) as exc:
        raise BitextError(f"malformed funnel record: {exc}") from None
    report.validate()
    return report


class _NormalizeStage:
    name = STAGE_NORMALIZE

    def process(self, pair: SentencePair) -> tuple[SentencePair | None, str]:
        return normalize_pair(pair), ""


class _BandStage:
    name = STAGE_BAND

    def __init__(self, low: float, high: float, scorer: Callable[[SentencePair], float]) -> None:
        self.low = low
        self.high = high
        self.scorer = scorer

    def process(self, pair: SentencePair) -> tuple[SentencePair | None, str]:
        score = self.scorer(pair)
        if score < self.low:
            return None, "low"
        if score > self.high:
            return None, "high"
        return pair, ""


class _ContainmentStage:
    name = STAGE_CONTAINMENT

    def __init__(self, threshold: float, order: int) -> None:
        self.threshold = threshold
        self.order = order

    def process(self, pair: SentencePair) -> tuple[SentencePair | None, str]:
        if pair_containment(pair, self.order).value > self.threshold:
            return None, "containment"
        return pair, ""


class _DedupStage:
    name = STAGE_DEDUP

    def __init__(self, mode: str, shards: int) -> None:
        self.mode = mode
        self.seen: list[set[bytes]] = [set() for _ in range(shards)]
        self.shards = shards

    def process(self, pair: SentencePair) -> tuple[SentencePair | None, str]:
        fp = fingerprint(canonical_key(pair, self.mode))
        shard = self.seen[fp[0] % self.shards]
        if fp in shard:
            return None, "duplicate"
        shard.add(fp)
        return pair, ""


@dataclass
class _StageRun:
    stage: object
    input: int = 0
    kept: int = 0
    removed: int = 0
    reasons: Counter = field(default_factory=Counter)
    seconds: float = 0.0


def _audit_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t")


class _Outputs:
    """Temp-file registry: everything renames into place only on commit."""

    def __init__(self) -> None:
        self._pending: list[tuple[Path, Path]] = []

    def stage(self, final: Path) -> Path:
        temp = final.with_name(final.name + ".tmp")
        self._pending.append((temp, final))
        return temp

    def commit(self) -> None:
        for temp, final in self._pending:
            os.replace(temp, final)
        self._pending.clear()

    def cleanup(self) -> None:
        for temp, _ in self._pending:
            try:
                temp.unlink()
            except FileNotFoundError:
                pass
        self._pending.clear()


def _resolve(base: Path, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base / p


def run_pipeline(config: PipelineConfig, base_dir: str | Path | None = None) -> FunnelReport:
    """Run the configured stages; returns the funnel report after writing all
    outputs (filtered bitext, optional train/dev and BPE model, audit file,
    manifest.json, funnel.txt, funnel.json) under output_dir."""
    validate_config(config)
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    input_loc: Path | tuple[Path, Path]
    if config.input_format == FORMAT_TSV:
        input_loc = _resolve(base, config.input_path)
        input_files = [input_loc]
    else:
        input_loc = (_resolve(base, config.input_path), _resolve(base, config.input_tgt_path))
        input_files = list(input_loc)
    for f in input_files:
        if not f.is_file():
            raise BitextError(f"config: input file not found: {f}")
    if config.scorer == SCORER_SIDECAR:
        for name in (config.src_vectors, config.tgt_vectors):
            if not _resolve(base, name).is_file():
                raise BitextError(f"config: sidecar vector file not found: {_resolve(base, name)}")
    out_dir = _resolve(base, config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    outputs = _Outputs()
    sidecar: SidecarScorer | None = None
    try:
        if config.scorer == SCORER_SIDECAR:
            sidecar = SidecarScorer(_resolve(base, config.src_vectors), _resolve(base, config.tgt_vectors))
            scorer: Callable[[SentencePair], float] = sidecar.score
        else:
            scorer = lambda pair: lexical_overlap_score(pair.src, pair.tgt)  # noqa: E731

        runs: list[_StageRun] = []
        for name in config.stages:
            if name == STAGE_NORMALIZE:
                runs.append(_StageRun(_NormalizeStage()))
            elif name == STAGE_BAND:
                runs.append(_StageRun(_BandStage(config.band_low, config.band_high, scorer)))
            elif name == STAGE_CONTAINMENT:
                runs.append(_StageRun(_ContainmentStage(config.containment_threshold, config.containment_order)))
            elif name == STAGE_DEDUP:
                runs.append(_StageRun(_DedupStage(config.dedup_mode, config.workers)))

        if config.input_format == FORMAT_TSV:
            filtered_final: Path | tuple[Path, Path] = out_dir / "filtered.tsv"
            filtered_temp: Path | tuple[Path, Path] = outputs.stage(filtered_final)
            filtered_handles = [open(filtered_temp, "w", encoding="utf-8", newline="\n")]
        else:
            filtered_final = (out_dir / "filtered.src", out_dir / "filtered.tgt")
            filtered_temp = (outputs.stage(filtered_final[0]), outputs.stage(filtered_final[1]))
            filtered_handles = [
                open(filtered_temp[0], "w", encoding="utf-8", newline="\n"),
                open(filtered_temp[1], "w", encoding="utf-8", newline="\n"),
            ]
        audit_handle = None
        if config.audit:
            audit_temp = outputs.stage(out_dir / "removed.tsv")
            audit_handle = open(audit_temp, "w", encoding="utf-8", newline="\n")

        total_input = 0
        final_kept = 0
        reader = read_bitext(input_loc, config.input_format)
        try:
            for pair in reader:
                total_input += 1
                removed_by = None
                for run in runs:
                    run.input += 1
                    started = time.perf_counter()
                    try:
                        result, reason = run.stage.process(pair)
                    except BitextError as exc:
                        raise BitextError(f"{run.stage.name}: {exc}") from None
                    finally:
                        run.seconds += time.perf_counter() - started
                    if result is None:
                        run.removed += 1
                        run.reasons[reason] += 1
                        removed_by = (run.stage.name, reason)
                        break
                    run.kept += 1
                    pair = result
                if removed_by is not None:
                    if audit_handle is not None:
                        stage_name, reason = removed_by
                        audit_handle.write(
                            f"{_audit_escape(pair.src)}\t{_audit_escape(pair.tgt)}\t{stage_name}:{reason}\n"
                        )
                    continue
                final_kept += 1
                if config.input_format == FORMAT_TSV:
                    filtered_handles[0].write(f"{pair.src}\t{pair.tgt}\n")
                else:
                    filtered_handles[0].write(pair.src + "\n")
                    filtered_handles[1].write(pair.tgt + "\n")
        except BitextError as exc:
            message = str(exc)
            known = tuple(f"{name}:" for name in PAIR_STAGES)
            if not message.startswith(known):
                raise BitextError(f"ingest: {exc}") from None
            raise
        finally:
            for handle in filtered_handles:
                handle.close()
            if audit_handle is not None:
                audit_handle.close()

        stage_counts = [
            StageCount(run.stage.name, run.input, run.kept, run.removed, dict(run.reasons), run.seconds)
            for run in runs
        ]

        train_count = dev_count = None
        train_temp: Path | tuple[Path, Path] | None = None
        if STAGE_SPLIT in config.stages:
            started = time.perf_counter()
            try:
                chosen = dev_index_set(final_kept, config.dev_size, config.seed)
            except BitextError as exc:
                raise BitextError(f"split: {exc}") from None
            if config.input_format == FORMAT_TSV:
                train_temp = outputs.stage(out_dir / "train.tsv")
                train_handles = [open(train_temp, "w", encoding="utf-8", newline="\n")]
                dev_handles = [open(outputs.stage(out_dir / "dev.tsv"), "w", encoding="utf-8", newline="\n")]
            else:
                train_temp = (outputs.stage(out_dir / "train.src"), outputs.stage(out_dir / "train.tgt"))
                train_handles = [
                    open(train_temp[0], "w", encoding="utf-8", newline="\n"),
                    open(train_temp[1], "w", encoding="utf-8", newline="\n"),
                ]
                dev_handles = [
                    open(outputs.stage(out_dir / "dev.src"), "w", encoding="utf-8", newline="\n"),
                    open(outputs.stage(out_dir / "dev.tgt"), "w", encoding="utf-8", newline="\n"),
                ]
            try:
                for pair in read_bitext(filtered_temp, config.input_format):
                    handles = dev_handles if pair.index in chosen else train_handles
                    if config.input_format == FORMAT_TSV:
                        handles[0].write(f"{pair.src}\t{pair.tgt}\n")
                    else:
                        handles[0].write(pair.src + "\n")
                        handles[1].write(pair.tgt + "\n")
            finally:
                for handle in train_handles + dev_handles:
                    handle.close()
            dev_count = config.dev_size
            train_count = final_kept - dev_count
            stage_counts.append(
                StageCount(
                    STAGE_SPLIT,
                    final_kept,
                    train_count,
                    dev_count,
                    {"dev": dev_count} if dev_count else {},
                    time.perf_counter() - started,
                )
            )

        bpe_learned = None
        if STAGE_BPE in config.stages:
            source = train_temp if train_temp is not None else filtered_temp
            freqs: Counter[str] = Counter()
            for pair in read_bitext(source, config.input_format):
                freqs.update(tokenize(pair.src))
                freqs.update(tokenize(pair.tgt))
            try:
                model = learn_bpe(freqs, config.bpe_merges)
            except BitextError as exc:
                raise BitextError(f"bpe: {exc}") from None
            bpe_learned = model.num_merges
            save_bpe(model, outputs.stage(out_dir / "bpe.model"))

        final_stage_kept = train_count if train_count is not None else final_kept
        report = FunnelReport(stage_counts, total_input, final_stage_kept)
        report.validate()

        manifest = {
            "config": config_text(config),
            "counts": {
                "input": total_input,
                "filtered": final_kept,
                "train": train_count,
                "dev": dev_count,
            },
            "bpe_merges_learned": bpe_learned,
            "tokenizer": TOKENIZER_VERSION,
            "normalized": STAGE_NORMALIZE in config.stages,
            "outputs": sorted(
                [final.name for _, final in outputs._pending] + ["funnel.json", "funnel.txt", "manifest.json"]
            ),
        }
        with open(outputs.stage(out_dir / "manifest.json"), "w", encoding="utf-8", newline="\n") as handle:
            handle.write(json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        with open(outputs.stage(out_dir / "funnel.txt"), "w", encoding="utf-8", newline="\n") as handle:
            handle.write(funnel_table(report))
        with open(outputs.stage(out_dir / "funnel.json"), "w", encoding="utf-8", newline="\n") as handle:
            handle.write(funnel_json(report))

        outputs.commit()
        return report
    except BaseException:
        outputs.cleanup()
        raise
    finally:
        if sidecar is not None:
            sidecar.close()


def run_pipeline_file(config_path: str | Path) -> FunnelReport:
    """Load a config file and run it; relative paths resolve against the
    config file's directory."""
    path = Path(config_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BitextError(f"config: cannot read {path}: {exc}") from None
    config = parse_config(text)
    return run_pipeline(config, base_dir=path.parent)


def build_training_mix(
    preset: str,
    msa_paths: list[str],
    da_paths: list[str],
    output_dir: str | Path,
    base_dir: str | Path | None = None,
) -> dict:
    """Concatenate experiment inputs in recorded order and write a manifest.

    'msa-only' takes only MSA bitexts; 'msa-plus-da' appends the dialectal
    bitexts after them. Returns the manifest dict (also written as
    mix-manifest.json next to mix.tsv).
    """
    if preset not in PRESETS:
        raise BitextError(f"unknown preset {preset!r}; known: {', '.join(PRESETS)}")
    if not msa_paths:
        raise BitextError(f"preset {preset}: at least one MSA input is required")
    if preset == PRESET_MSA_ONLY and da_paths:
        raise BitextError("preset msa-only takes no dialectal inputs")
    if preset == PRESET_MSA_PLUS_DA and not da_paths:
        raise BitextError("preset msa-plus-da needs at least one dialectal input")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    ordered = [("msa", p) for p in msa_paths] + [("da", p) for p in da_paths]
    for _, p in ordered:
        if not _resolve(base, p).is_file():
            raise BitextError(f"mix input not found: {_resolve(base, p)}")
    out_dir = _resolve(base, str(output_dir))
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = _Outputs()
    components = []
    total = 0
    try:
        with open(outputs.stage(out_dir / "mix.tsv"), "w", encoding="utf-8", newline="\n") as out:
            for role, p in ordered:
                count = 0
                for pair in read_bitext(_resolve(base, p), FORMAT_TSV):
                    out.write(f"{pair.src}\t{pair.tgt}\n")
                    count += 1
                components.append({"role": role, "path": p, "pairs": count})
                total += count
        manifest = {"preset": preset, "components": components, "total_pairs": total}
        with open(outputs.stage(out_dir / "mix-manifest.json"), "w", encoding="utf-8", newline="\n") as handle:
            handle.write(json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        outputs.commit()
    except BaseException:
        outputs.cleanup()
        raise
    return manifest
