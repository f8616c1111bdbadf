"""Command-line front end.

Every subcommand streams where the data allows it, prints a one-line
accounting summary on success, and exits 2 with ``<command>: <reason>`` on
stderr for malformed inputs or arguments. Text inputs are UTF-8, one
sentence per line; bitext inputs are either tab-separated or split files
(see --format).
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import ExitStack
from pathlib import Path
from typing import Callable, Iterator

from . import __version__
from .bleu import DEFAULT_MAX_ORDER, SMOOTHING_MODES, SMOOTHING_NONE, corpus_bleu, report_json, report_text
from .bpe import DEFAULT_NUM_MERGES, BpeEncoder, learn_bpe, load_bpe, save_bpe, token_frequencies
from .corpus import FORMAT_SPLIT, FORMAT_TSV, FORMATS, BitextError, SentencePair, read_bitext, read_lines, write_bitext
from .dedup import MODE_PAIR, MODES, iter_dedup
from .dialect import DEFAULT_ORDER, classify, distribution_report, load_dialect, save_dialect, train_dialect
from .normalize import tokenize
from .pipeline import PRESETS, build_training_mix, funnel_table, run_pipeline_file
from .qa import (
    DEFAULT_BAND_HIGH,
    DEFAULT_BAND_LOW,
    DEFAULT_CONTAINMENT_ORDER,
    DEFAULT_CONTAINMENT_THRESHOLD,
    SCORERS,
    SCORER_LEXICAL,
    SCORER_SIDECAR,
    SidecarScorer,
    lexical_overlap_score,
    normalize_pair,
    pair_containment,
)
from .split import DEFAULT_DEV_SIZE, dev_index_set
from .truecase import apply_truecase, load_truecaser, save_truecaser, train_truecaser


def _in_location(args: argparse.Namespace) -> str | tuple[str, str]:
    if args.format == FORMAT_SPLIT:
        if not args.tgt:
            raise BitextError("split-files input needs --tgt")
        return (args.input, args.tgt)
    if args.tgt:
        raise BitextError("--tgt only applies to --format split-files")
    return args.input


def _out_location(args: argparse.Namespace) -> str | tuple[str, str]:
    if args.format == FORMAT_SPLIT:
        if not args.out_tgt:
            raise BitextError("split-files output needs --out-tgt")
        return (args.out, args.out_tgt)
    if args.out_tgt:
        raise BitextError("--out-tgt only applies to --format split-files")
    return args.out


def _audit_line(pair: SentencePair, label: str) -> str:
    esc = lambda s: s.replace("\\", "\\\\").replace("\t", "\\t")  # noqa: E731
    return f"{esc(pair.src)}\t{esc(pair.tgt)}\t{label}\n"


def _add_bitext_in(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--in", dest="input", required=True, help="input bitext (tsv path, or source side for split-files)")
    parser.add_argument("--tgt", default="", help="target side (split-files only)")
    parser.add_argument("--format", choices=FORMATS, default=FORMAT_TSV)


def _add_bitext_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="kept-pairs output (tsv path, or source side for split-files)")
    parser.add_argument("--out-tgt", default="", help="target-side output (split-files only)")


def _cmd_qa(args: argparse.Namespace) -> int:
    in_loc = _in_location(args)
    out_loc = _out_location(args)
    if args.band_low > args.band_high:
        raise BitextError(f"invalid band: low {args.band_low} > high {args.band_high}")
    if not 0.0 <= args.containment_threshold <= 1.0:
        raise BitextError(f"containment threshold must be in [0, 1], got {args.containment_threshold}")
    counts = {"input": 0, "kept": 0, "low": 0, "high": 0, "containment": 0}
    with ExitStack() as stack:
        if args.scorer == SCORER_SIDECAR:
            if not (args.src_vectors and args.tgt_vectors):
                raise BitextError("sidecar scorer needs --src-vectors and --tgt-vectors")
            scorer: Callable[[SentencePair], float] = stack.enter_context(
                SidecarScorer(args.src_vectors, args.tgt_vectors)
            ).score
        else:
            scorer = lambda p: lexical_overlap_score(p.src, p.tgt)  # noqa: E731
        audit = (
            stack.enter_context(open(args.removed, "w", encoding="utf-8", newline="\n")) if args.removed else None
        )

        def survivors() -> Iterator[SentencePair]:
            for pair in read_bitext(in_loc, args.format):
                counts["input"] += 1
                if args.normalize:
                    pair = normalize_pair(pair)
                score = scorer(pair)
                if score < args.band_low:
                    reason = "low"
                elif score > args.band_high:
                    reason = "high"
                elif pair_containment(pair, args.containment_order).value > args.containment_threshold:
                    reason = "containment"
                else:
                    counts["kept"] += 1
                    yield pair
                    continue
                counts[reason] += 1
                if audit is not None:
                    audit.write(_audit_line(pair, reason))

        write_bitext(survivors(), out_loc, args.format)
    print(
        "input={input} kept={kept} low={low} high={high} containment={containment}".format(**counts)
    )
    return 0


def _cmd_dedup(args: argparse.Namespace) -> int:
    in_loc = _in_location(args)
    out_loc = _out_location(args)
    removed = 0
    with ExitStack() as stack:
        audit = (
            stack.enter_context(open(args.removed, "w", encoding="utf-8", newline="\n")) if args.removed else None
        )

        def on_removed(pair: SentencePair) -> None:
            nonlocal removed
            removed += 1
            if audit is not None:
                audit.write(_audit_line(pair, "duplicate"))

        kept = write_bitext(
            iter_dedup(
                read_bitext(in_loc, args.format),
                mode=args.mode,
                shards=args.shards,
                strict=args.strict,
                on_removed=on_removed,
            ),
            out_loc,
            args.format,
        )
    print(f"input={kept + removed} kept={kept} removed={removed}")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    in_loc = _in_location(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    total = sum(1 for _ in read_bitext(in_loc, args.format))
    chosen = dev_index_set(total, args.n_dev, args.seed)
    if args.format == FORMAT_TSV:
        train_loc: str | tuple[str, str] = str(out_dir / "train.tsv")
        dev_loc: str | tuple[str, str] = str(out_dir / "dev.tsv")
    else:
        train_loc = (str(out_dir / "train.src"), str(out_dir / "train.tgt"))
        dev_loc = (str(out_dir / "dev.src"), str(out_dir / "dev.tgt"))

    def side(want_dev: bool) -> Iterator[SentencePair]:
        for pair in read_bitext(in_loc, args.format):
            if (pair.index in chosen) == want_dev:
                yield pair

    train_count = write_bitext(side(False), train_loc, args.format)
    dev_count = write_bitext(side(True), dev_loc, args.format)
    print(f"total={total} train={train_count} dev={dev_count} seed={args.seed}")
    return 0


def _cmd_bpe_learn(args: argparse.Namespace) -> int:
    def sentences() -> Iterator[list[str]]:
        for path in args.input:
            for line in read_lines(path):
                yield tokenize(line)

    freqs = token_frequencies(sentences())
    model = learn_bpe(freqs, args.merges)
    save_bpe(model, args.out)
    print(f"merges={model.num_merges} types={len(freqs)}")
    return 0


def _cmd_bpe_apply(args: argparse.Namespace) -> int:
    encoder = BpeEncoder(load_bpe(args.model))
    count = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as out:
        for line in read_lines(args.input):
            out.write(" ".join(encoder.encode(tokenize(line))) + "\n")
            count += 1
    print(f"lines={count}")
    return 0


def _cmd_bleu(args: argparse.Namespace) -> int:
    hyp = [tokenize(line) for line in read_lines(args.hyp)]
    ref = [tokenize(line) for line in read_lines(args.ref)]
    report = corpus_bleu(hyp, ref, max_order=args.max_order, lowercase=args.lowercase, smoothing=args.smoothing)
    print(report_json(report) if args.json else report_text(report), end="")
    return 0


def _cmd_truecase_train(args: argparse.Namespace) -> int:
    model = train_truecaser(line.split() for line in read_lines(args.input))
    save_truecaser(model, args.out)
    print(f"types={len(model.counts)}")
    return 0


def _cmd_truecase(args: argparse.Namespace) -> int:
    model = load_truecaser(args.model)
    count = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as out:
        for line in read_lines(args.input):
            out.write(" ".join(apply_truecase(model, line.split())) + "\n")
            count += 1
    print(f"lines={count}")
    return 0


def _nonblank(path: str) -> list[str]:
    return [line for line in read_lines(path) if line.strip()]


def _cmd_dialect_train(args: argparse.Namespace) -> int:
    msa = _nonblank(args.msa)
    da = _nonblank(args.da)
    model = train_dialect(msa, da, order=args.order)
    save_dialect(model, args.out)
    print(f"msa={len(msa)} da={len(da)} order={args.order}")
    return 0


def _cmd_dialect_report(args: argparse.Namespace) -> int:
    model = load_dialect(args.model)
    sentences = _nonblank(args.input)
    if args.per_line:
        for sentence in sentences:
            label, log_odds = classify(model, sentence)
            print(f"{label}\t{log_odds:.4f}\t{sentence}")
    dist = distribution_report(model, sentences)
    if args.json:
        payload = {
            "total": dist.total,
            "msa": dist.msa_count,
            "da": dist.da_count,
            "msa_percent": dist.msa_percent,
            "da_percent": dist.da_percent,
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        print(
            f"total={dist.total} msa={dist.msa_count} da={dist.da_count} "
            f"msa_percent={dist.msa_percent:.2f} da_percent={dist.da_percent:.2f}"
        )
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    if bool(args.config) == bool(args.mix):
        raise BitextError("pass exactly one of --config or --mix")
    if args.config:
        if args.msa or args.da or args.out_dir:
            raise BitextError("--msa/--da/--out-dir only apply to --mix")
        report = run_pipeline_file(args.config)
        print(funnel_table(report), end="")
        return 0
    if not args.out_dir:
        raise BitextError("--mix needs --out-dir")
    manifest = build_training_mix(args.mix, args.msa, args.da, args.out_dir)
    print(f"preset={manifest['preset']} components={len(manifest['components'])} total={manifest['total_pairs']}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitextkit", description="Bitext curation toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qa", help="similarity-band and containment filtering")
    _add_bitext_in(p)
    _add_bitext_out(p)
    p.add_argument("--removed", default="", help="write removed pairs with reasons to this tsv")
    p.add_argument("--normalize", action="store_true", help="strip diacritics and mask entities first")
    p.add_argument("--scorer", choices=SCORERS, default=SCORER_LEXICAL)
    p.add_argument("--src-vectors", default="", help="sidecar vectors for the source side")
    p.add_argument("--tgt-vectors", default="", help="sidecar vectors for the target side")
    p.add_argument("--band-low", type=float, default=DEFAULT_BAND_LOW)
    p.add_argument("--band-high", type=float, default=DEFAULT_BAND_HIGH)
    p.add_argument("--containment-threshold", type=float, default=DEFAULT_CONTAINMENT_THRESHOLD)
    p.add_argument("--containment-order", type=int, default=DEFAULT_CONTAINMENT_ORDER)
    p.set_defaults(func=_cmd_qa)

    p = sub.add_parser("dedup", help="exact duplicate removal")
    _add_bitext_in(p)
    _add_bitext_out(p)
    p.add_argument("--removed", default="", help="write removed pairs to this tsv")
    p.add_argument("--mode", choices=MODES, default=MODE_PAIR)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--strict", action="store_true", help="compare full keys instead of fingerprints")
    p.set_defaults(func=_cmd_dedup)

    p = sub.add_parser("split", help="reservoir-sampled train/dev split")
    _add_bitext_in(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-dev", type=int, default=DEFAULT_DEV_SIZE)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("bpe-learn", help="learn merge operations from text")
    p.add_argument("--in", dest="input", required=True, nargs="+", help="text file(s), one sentence per line")
    p.add_argument("--merges", type=int, default=DEFAULT_NUM_MERGES)
    p.add_argument("--out", required=True, help="model file")
    p.set_defaults(func=_cmd_bpe_learn)

    p = sub.add_parser("bpe-apply", help="segment text with a learned model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bpe_apply)

    p = sub.add_parser("bleu", help="corpus BLEU of hypothesis vs reference")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    p.add_argument("--smoothing", choices=SMOOTHING_MODES, default=SMOOTHING_NONE)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bleu)

    p = sub.add_parser("truecase-train", help="train a truecasing model")
    p.add_argument("--in", dest="input", required=True, help="tokenized text, one sentence per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_truecase_train)

    p = sub.add_parser("truecase", help="apply a truecasing model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_truecase)

    p = sub.add_parser("dialect-train", help="train the MSA/DA classifier")
    p.add_argument("--msa", required=True, help="MSA sentences, one per line")
    p.add_argument("--da", required=True, help="dialectal sentences, one per line")
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_dialect_train)

    p = sub.add_parser("dialect-report", help="corpus-level dialect distribution")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--per-line", action="store_true", help="also print one label line per sentence")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_dialect_report)

    p = sub.add_parser("pipeline", help="run a configured pipeline, or build a training mix")
    p.add_argument("--config", default="", help="pipeline config file")
    p.add_argument("--mix", default="", choices=("",) + PRESETS, metavar="PRESET", help=f"training-mix preset: {', '.join(PRESETS)}")
    p.add_argument("--msa", nargs="*", default=[], help="MSA bitexts for --mix")
    p.add_argument("--da", nargs="*", default=[], help="dialectal bitexts for --mix")
    p.add_argument("--out-dir", default="", help="output directory for --mix")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BitextError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
