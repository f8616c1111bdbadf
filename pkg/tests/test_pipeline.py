"""Pipeline: config round-trips, funnel accounting, orchestration, crash safety."""
import json
import os

import pytest

from bitextkit.bpe import load_bpe
from bitextkit.corpus import FORMAT_SPLIT, BitextError, read_bitext
from bitextkit.pipeline import (
    DEFAULT_STAGES,
    FunnelReport,
    PipelineConfig,
    StageCount,
    build_training_mix,
    config_text,
    funnel_json,
    funnel_table,
    parse_config,
    parse_funnel,
    run_pipeline,
    run_pipeline_file,
    validate_config,
)

# ------------------------------------------------------------------- config


def test_config_round_trip_defaults():
    config = PipelineConfig()
    assert parse_config(config_text(config)) == config


def test_config_round_trip_modified():
    config = PipelineConfig(
        input_path="data/in.tsv",
        input_format="split-files",
        input_tgt_path="data/in.en",
        output_dir="out",
        stages=("normalize", "band", "dedup", "split", "bpe"),
        scorer="sidecar",
        src_vectors="v.src",
        tgt_vectors="v.tgt",
        band_low=0.25,
        band_high=0.97,
        containment_threshold=0.8,
        containment_order=2,
        dedup_mode="src-only",
        dev_size=500,
        bpe_merges=1000,
        seed=11,
        workers=4,
        audit=False,
    )
    assert parse_config(config_text(config)) == config


def test_config_parse_tolerates_comments_and_blanks():
    config = parse_config("# a comment\n\ninput = x.tsv\noutput_dir = out\n")
    assert config.input_path == "x.tsv"
    assert config.stages == DEFAULT_STAGES  # unset keys keep defaults


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("wat = 1\n", "unknown key"),
        ("input x.tsv\n", "expected"),
        ("seed = 1\nseed = 2\n", "duplicate"),
        ("workers = many\n", "bad value"),
        ("band.low = maybe\n", "bad value"),
        ("audit = yes\n", "bad value"),
    ],
)
def test_config_parse_errors(text, fragment):
    with pytest.raises(BitextError, match=fragment):
        parse_config(text)


@pytest.mark.parametrize(
    "kwargs,fragment",
    [
        (dict(input_path=""), "missing input"),
        (dict(output_dir=""), "missing output_dir"),
        (dict(input_format="xml"), "unknown input format"),
        (dict(input_format="split-files"), "needs input_tgt"),
        (dict(stages=()), "empty stage list"),
        (dict(stages=("band", "polish")), "unknown stage"),
        (dict(stages=("band", "band")), "duplicate stage"),
        (dict(stages=("split", "band")), "must follow"),
        (dict(stages=("bpe", "split")), "bpe must come after split"),
        (dict(scorer="neural"), "unknown scorer"),
        (dict(scorer="sidecar"), "sidecar scorer needs"),
        (dict(band_low=0.9, band_high=0.2), "invalid band"),
        (dict(containment_threshold=1.5), "outside"),
        (dict(containment_order=0), "order must be >= 1"),
        (dict(dedup_mode="fuzzy"), "unknown dedup mode"),
        (dict(dev_size=-1), "dev size"),
        (dict(stages=("band", "bpe"), bpe_merges=0), "merges"),
        (dict(workers=0), "workers"),
    ],
)
def test_validate_config_rejects(kwargs, fragment):
    base = dict(input_path="in.tsv", output_dir="out")
    base.update(kwargs)
    with pytest.raises(BitextError, match=fragment):
        validate_config(PipelineConfig(**base))


# ------------------------------------------------------------------- funnel


def _sample_report():
    return FunnelReport(
        stages=[
            StageCount("band", 10, 9, 1, {"high": 1}, 0.5),
            StageCount("dedup", 9, 7, 2, {"duplicate": 2}, 0.25),
        ],
        total_input=10,
        final_kept=7,
    )


def test_funnel_validate_accepts_chained():
    _sample_report().validate()


@pytest.mark.parametrize(
    "mutate",
    [
        lambda r: setattr(r.stages[1], "input", 8),           # breaks chaining
        lambda r: setattr(r.stages[0], "kept", 8),            # kept+removed != input
        lambda r: r.stages[0].reasons.update({"low": 5}),     # reasons != removed
        lambda r: setattr(r, "final_kept", 6),                # tail mismatch
    ],
)
def test_funnel_validate_rejects_broken(mutate):
    report = _sample_report()
    mutate(report)
    with pytest.raises(BitextError, match="funnel broken"):
        report.validate()


def test_funnel_json_round_trip():
    report = _sample_report()
    assert parse_funnel(funnel_json(report)) == report


def test_funnel_table_layout():
    table = funnel_table(_sample_report())
    lines = table.splitlines()
    assert lines[0].split() == ["stage", "input", "kept", "removed", "seconds", "reasons"]
    assert lines[-1].startswith("total")
    assert "duplicate=2" in table


def test_parse_funnel_rejects_garbage():
    with pytest.raises(BitextError):
        parse_funnel("not json")
    with pytest.raises(BitextError):
        parse_funnel('{"stages": []}')


# ---------------------------------------------------------------- worked run


def _in_band(tag, i):
    # half the tokens shared across sides: score 0.5, no shared trigrams
    return (f"{tag}a{i} {tag}b{i} {tag}c{i} {tag}d{i}", f"{tag}a{i} {tag}b{i} {tag}x{i} {tag}y{i}")


TEN_PAIRS = [
    _in_band("p", 0),
    ("same text here now", "same text here now"),         # band: high
    _in_band("q", 2),
    ("a b c d e f g", "a b c d e f x"),                   # containment 4/5 = 0.8
    _in_band("r", 4),
    _in_band("p", 0),                                     # duplicate of index 0
    _in_band("s", 6),
    _in_band("q", 2),                                     # duplicate of index 2
    _in_band("t", 8),
    _in_band("u", 9),
]


def _write_ten(tmp_path):
    path = tmp_path / "ten.tsv"
    path.write_text("".join(f"{s}\t{t}\n" for s, t in TEN_PAIRS), encoding="utf-8")
    return path


def test_worked_funnel_example(tmp_path):
    _write_ten(tmp_path)
    config = PipelineConfig(input_path="ten.tsv", output_dir="out")
    report = run_pipeline(config, base_dir=tmp_path)

    assert report.total_input == 10
    assert report.final_kept == 6
    by_name = {s.name: s for s in report.stages}
    assert (by_name["band"].input, by_name["band"].kept, by_name["band"].reasons) == (10, 9, {"high": 1})
    assert (by_name["containment"].kept, by_name["containment"].reasons) == (8, {"containment": 1})
    assert (by_name["dedup"].kept, by_name["dedup"].reasons) == (6, {"duplicate": 2})

    out = tmp_path / "out"
    kept = list(read_bitext(out / "filtered.tsv"))
    assert len(kept) == 6
    assert kept[0].src.startswith("pa0")
    removed_lines = (out / "removed.tsv").read_text(encoding="utf-8").splitlines()
    assert [line.split("\t")[2] for line in removed_lines] == [
        "band:high",
        "containment:containment",
        "dedup:duplicate",
        "dedup:duplicate",
    ]
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["counts"] == {"input": 10, "filtered": 6, "train": None, "dev": None}
    assert manifest["tokenizer"] == "rules-v1"
    report_back = parse_funnel((out / "funnel.json").read_text(encoding="utf-8"))
    assert report_back == report


def test_outputs_identical_across_workers_and_reruns(tmp_path):
    _write_ten(tmp_path)
    data_files = ["filtered.tsv", "train.tsv", "dev.tsv", "removed.tsv", "bpe.model"]

    def make_config(run, workers):
        return PipelineConfig(
            input_path="ten.tsv",
            output_dir=run,
            stages=("band", "containment", "dedup", "split", "bpe"),
            dev_size=2,
            bpe_merges=8,
            seed=5,
            workers=workers,
        )

    blobs = {}
    for run, workers in (("w1", 1), ("w2", 2), ("w8", 8)):
        run_pipeline(make_config(run, workers), base_dir=tmp_path)
        blobs[run] = {name: (tmp_path / run / name).read_bytes() for name in data_files}
    assert blobs["w1"] == blobs["w2"] == blobs["w8"]
    # rerunning the exact same config overwrites with identical bytes,
    # manifest included
    m2 = (tmp_path / "w2" / "manifest.json").read_bytes()
    run_pipeline(make_config("w2", 2), base_dir=tmp_path)
    assert (tmp_path / "w2" / "manifest.json").read_bytes() == m2
    rerun = {name: (tmp_path / "w2" / name).read_bytes() for name in data_files}
    assert rerun == blobs["w2"]
    # funnel differs only in wall-clock fields
    f2 = parse_funnel((tmp_path / "w2" / "funnel.json").read_text(encoding="utf-8"))
    f8 = parse_funnel((tmp_path / "w8" / "funnel.json").read_text(encoding="utf-8"))
    for stage in f2.stages + f8.stages:
        stage.seconds = 0.0
    assert f2 == f8


def test_split_and_bpe_outputs(tmp_path):
    _write_ten(tmp_path)
    config = PipelineConfig(
        input_path="ten.tsv",
        output_dir="out",
        stages=("band", "containment", "dedup", "split", "bpe"),
        dev_size=2,
        bpe_merges=10,
        seed=1,
    )
    report = run_pipeline(config, base_dir=tmp_path)
    out = tmp_path / "out"
    train = list(read_bitext(out / "train.tsv"))
    dev = list(read_bitext(out / "dev.tsv"))
    assert len(train) == 4 and len(dev) == 2
    assert report.final_kept == 4  # split is the last counted stage
    split_row = report.stages[-1]
    assert split_row.name == "split" and split_row.reasons == {"dev": 2}
    model = load_bpe(out / "bpe.model")
    assert 0 < model.num_merges <= 10
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["counts"]["train"] == 4 and manifest["counts"]["dev"] == 2
    assert manifest["bpe_merges_learned"] == model.num_merges
    # filtered pairs are exactly train + dev, order preserved within each
    filtered = [(p.src, p.tgt) for p in read_bitext(out / "filtered.tsv")]
    merged = [(p.src, p.tgt) for p in train] + [(p.src, p.tgt) for p in dev]
    assert sorted(merged) == sorted(filtered)


def test_split_files_format_end_to_end(tmp_path):
    (tmp_path / "in.src").write_text("".join(s + "\n" for s, _ in TEN_PAIRS), encoding="utf-8")
    (tmp_path / "in.tgt").write_text("".join(t + "\n" for _, t in TEN_PAIRS), encoding="utf-8")
    config = PipelineConfig(
        input_path="in.src",
        input_tgt_path="in.tgt",
        input_format="split-files",
        output_dir="out",
        stages=("band", "containment", "dedup", "split"),
        dev_size=1,
    )
    report = run_pipeline(config, base_dir=tmp_path)
    assert report.final_kept == 5
    out = tmp_path / "out"
    for name in ("filtered.src", "filtered.tgt", "train.src", "train.tgt", "dev.src", "dev.tgt"):
        assert (out / name).is_file(), name
    src_lines = (out / "filtered.src").read_text(encoding="utf-8").splitlines()
    tgt_lines = (out / "filtered.tgt").read_text(encoding="utf-8").splitlines()
    assert len(src_lines) == len(tgt_lines) == 6


def test_normalize_stage_rewrites_text(tmp_path):
    (tmp_path / "in.tsv").write_text(
        "see http://x.co there people\tsee http://y.dq there folks\n", encoding="utf-8"
    )
    config = PipelineConfig(input_path="in.tsv", output_dir="out", stages=("normalize", "band"))
    run_pipeline(config, base_dir=tmp_path)
    [pair] = read_bitext(tmp_path / "out" / "filtered.tsv")
    assert pair.src == "see URL there people"
    assert pair.tgt == "see URL there folks"


def test_audit_can_be_disabled(tmp_path):
    _write_ten(tmp_path)
    config = PipelineConfig(input_path="ten.tsv", output_dir="out", audit=False)
    run_pipeline(config, base_dir=tmp_path)
    assert not (tmp_path / "out" / "removed.tsv").exists()


def test_sidecar_scorer_wired_through(tmp_path):
    _write_ten(tmp_path)
    rows = []
    for i in range(10):
        rows.append(("1 0", "-1 0") if i == 4 else ("1 0", "1 1"))
    (tmp_path / "v.src").write_text("".join(r[0] + "\n" for r in rows), encoding="utf-8")
    (tmp_path / "v.tgt").write_text("".join(r[1] + "\n" for r in rows), encoding="utf-8")
    config = PipelineConfig(
        input_path="ten.tsv",
        output_dir="out",
        stages=("band",),
        scorer="sidecar",
        src_vectors="v.src",
        tgt_vectors="v.tgt",
    )
    report = run_pipeline(config, base_dir=tmp_path)
    assert report.stages[0].reasons == {"low": 1}
    assert report.final_kept == 9


def test_missing_input_reported_before_any_output(tmp_path):
    config = PipelineConfig(input_path="absent.tsv", output_dir="out")
    with pytest.raises(BitextError, match="input file not found"):
        run_pipeline(config, base_dir=tmp_path)
    assert not (tmp_path / "out").exists()


def test_failure_leaves_no_partial_outputs(tmp_path):
    _write_ten(tmp_path)
    config = PipelineConfig(
        input_path="ten.tsv",
        output_dir="out",
        stages=("band", "containment", "dedup", "split"),
        dev_size=50,  # more than can survive
    )
    with pytest.raises(BitextError, match="^split:"):
        run_pipeline(config, base_dir=tmp_path)
    assert os.listdir(tmp_path / "out") == []


def test_ingest_errors_are_labeled(tmp_path):
    (tmp_path / "bad.tsv").write_bytes(b"ok\tok\nbroken line no tab\n")
    config = PipelineConfig(input_path="bad.tsv", output_dir="out")
    with pytest.raises(BitextError, match="^ingest:"):
        run_pipeline(config, base_dir=tmp_path)
    assert os.listdir(tmp_path / "out") == []


def test_band_stage_errors_are_labeled(tmp_path):
    _write_ten(tmp_path)
    (tmp_path / "v.src").write_text("1 0\n", encoding="utf-8")  # too few rows
    (tmp_path / "v.tgt").write_text("1 0\n", encoding="utf-8")
    config = PipelineConfig(
        input_path="ten.tsv",
        output_dir="out",
        stages=("band",),
        scorer="sidecar",
        src_vectors="v.src",
        tgt_vectors="v.tgt",
    )
    with pytest.raises(BitextError, match="^band:"):
        run_pipeline(config, base_dir=tmp_path)
    assert os.listdir(tmp_path / "out") == []


def test_run_pipeline_file_resolves_relative_to_config(tmp_path):
    _write_ten(tmp_path)
    (tmp_path / "run.conf").write_text("input = ten.tsv\noutput_dir = out\n", encoding="utf-8")
    report = run_pipeline_file(tmp_path / "run.conf")
    assert report.final_kept == 6
    assert (tmp_path / "out" / "filtered.tsv").is_file()


# ------------------------------------------------------------------ presets


def _write_mix_inputs(tmp_path):
    (tmp_path / "m1.tsv").write_text("ma1\tme1\nma2\tme2\n", encoding="utf-8")
    (tmp_path / "m2.tsv").write_text("mb1\tmf1\n", encoding="utf-8")
    (tmp_path / "d1.tsv").write_text("da1\tde1\nda2\tde2\nda3\tde3\n", encoding="utf-8")


def test_mix_msa_only(tmp_path):
    _write_mix_inputs(tmp_path)
    manifest = build_training_mix("msa-only", ["m1.tsv", "m2.tsv"], [], "mix", base_dir=tmp_path)
    assert manifest["total_pairs"] == 3
    assert [c["role"] for c in manifest["components"]] == ["msa", "msa"]
    lines = (tmp_path / "mix" / "mix.tsv").read_text(encoding="utf-8").splitlines()
    assert lines == ["ma1\tme1", "ma2\tme2", "mb1\tmf1"]
    on_disk = json.loads((tmp_path / "mix" / "mix-manifest.json").read_text(encoding="utf-8"))
    assert on_disk == manifest


def test_mix_msa_plus_da_appends_dialect_after_msa(tmp_path):
    _write_mix_inputs(tmp_path)
    manifest = build_training_mix("msa-plus-da", ["m1.tsv"], ["d1.tsv"], "mix", base_dir=tmp_path)
    assert manifest["total_pairs"] == 5
    lines = (tmp_path / "mix" / "mix.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[:2] == ["ma1\tme1", "ma2\tme2"]
    assert lines[2:] == ["da1\tde1", "da2\tde2", "da3\tde3"]


def test_mix_preset_validation(tmp_path):
    _write_mix_inputs(tmp_path)
    with pytest.raises(BitextError, match="unknown preset"):
        build_training_mix("everything", ["m1.tsv"], [], "mix", base_dir=tmp_path)
    with pytest.raises(BitextError, match="no dialectal inputs"):
        build_training_mix("msa-only", ["m1.tsv"], ["d1.tsv"], "mix", base_dir=tmp_path)
    with pytest.raises(BitextError, match="at least one dialectal"):
        build_training_mix("msa-plus-da", ["m1.tsv"], [], "mix", base_dir=tmp_path)
    with pytest.raises(BitextError, match="at least one MSA"):
        build_training_mix("msa-only", [], [], "mix", base_dir=tmp_path)
    with pytest.raises(BitextError, match="not found"):
        build_training_mix("msa-only", ["ghost.tsv"], [], "mix", base_dir=tmp_path)
