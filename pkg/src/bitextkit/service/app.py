"""FastAPI service over the core package.

Stateless by design: every request carries all of its inputs, and trained
models move through the API as their file-format text. Domain errors map to
HTTP 400 with the library's message; unknown registry names give 404.
"""
from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bleu import corpus_bleu
from ..bpe import BpeEncoder, dumps_bpe, learn_bpe, loads_bpe, token_frequencies
from ..corpus import BitextError, SentencePair
from ..dedup import dedup_exact
from ..dialect import classify, distribution_report, dumps_dialect, loads_dialect, train_dialect
from ..normalize import TOKENIZER_VERSION, detokenize, mask_entities, strip_diacritics, tokenize
from ..pipeline import funnel_json, funnel_table, parse_config, run_pipeline
from ..qa import band_filter, containment_filter, lexical_overlap_score, pair_containment
from ..registry import load_registry, region_totals, registry_lookup
from ..split import SplitSpec, sample_split
from ..truecase import apply_truecase, dumps_truecaser, loads_truecaser, train_truecaser
from . import schemas


def _to_pairs(pairs: list[schemas.Pair]) -> list[SentencePair]:
    return [SentencePair(p.src, p.tgt, index=i) for i, p in enumerate(pairs)]


def _from_pairs(pairs: list[SentencePair]) -> list[schemas.Pair]:
    return [schemas.Pair(src=p.src, tgt=p.tgt) for p in pairs]


def create_app() -> FastAPI:
    app = FastAPI(title="bitextkit", version=__version__)

    @app.exception_handler(BitextError)
    async def _domain_error(_request: Request, exc: BitextError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__, tokenizer=TOKENIZER_VERSION)

    @app.get("/registry", response_model=list[schemas.DatasetInfo])
    def registry_list() -> list[schemas.DatasetInfo]:
        entries = sorted(load_registry().values(), key=lambda e: e.name)
        return [schemas.DatasetInfo(**vars(e)) for e in entries]

    @app.get("/registry/totals", response_model=schemas.RegionTotalsResponse)
    def registry_totals() -> schemas.RegionTotalsResponse:
        return schemas.RegionTotalsResponse(totals=region_totals())

    @app.get("/registry/{name}", response_model=schemas.DatasetInfo)
    def registry_entry(name: str) -> schemas.DatasetInfo:
        try:
            entry = registry_lookup(name)
        except BitextError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        return schemas.DatasetInfo(**vars(entry))

    @app.post("/normalize", response_model=schemas.NormalizeResponse)
    def normalize(req: schemas.NormalizeRequest) -> schemas.NormalizeResponse:
        text = req.text
        if req.strip:
            text = strip_diacritics(text)
        if req.mask:
            text = mask_entities(text)
        return schemas.NormalizeResponse(text=text)

    @app.post("/tokenize", response_model=schemas.TokenizeResponse)
    def tokenize_text(req: schemas.TokenizeRequest) -> schemas.TokenizeResponse:
        tokens = tokenize(req.text)
        return schemas.TokenizeResponse(tokens=tokens, detokenized=detokenize(tokens))

    @app.post("/score", response_model=schemas.ScoreResponse)
    def score(req: schemas.ScoreRequest) -> schemas.ScoreResponse:
        return schemas.ScoreResponse(scores=[lexical_overlap_score(p.src, p.tgt) for p in req.pairs])

    @app.post("/qa/band", response_model=schemas.BandResponse)
    def qa_band(req: schemas.BandRequest) -> schemas.BandResponse:
        part = band_filter(_to_pairs(req.pairs), low=req.low, high=req.high)
        return schemas.BandResponse(
            kept=_from_pairs(part.kept),
            removed_low=_from_pairs(part.removed_low),
            removed_high=_from_pairs(part.removed_high),
        )

    @app.post("/qa/containment", response_model=schemas.ContainmentResponse)
    def qa_containment(req: schemas.ContainmentRequest) -> schemas.ContainmentResponse:
        pairs = _to_pairs(req.pairs)
        ratios = [pair_containment(p, req.order).value for p in pairs]
        part = containment_filter(pairs, threshold=req.threshold, n=req.order)
        return schemas.ContainmentResponse(
            kept=_from_pairs(part.kept), removed=_from_pairs(part.removed), ratios=ratios
        )

    @app.post("/dedup", response_model=schemas.DedupResponse)
    def dedup(req: schemas.DedupRequest) -> schemas.DedupResponse:
        kept, removed = dedup_exact(_to_pairs(req.pairs), mode=req.mode, strict=req.strict)
        return schemas.DedupResponse(kept=_from_pairs(kept), removed=removed)

    @app.post("/split", response_model=schemas.SplitResponse)
    def split(req: schemas.SplitRequest) -> schemas.SplitResponse:
        train, dev = sample_split(_to_pairs(req.pairs), SplitSpec(n_dev=req.n_dev, seed=req.seed))
        return schemas.SplitResponse(train=_from_pairs(train), dev=_from_pairs(dev))

    @app.post("/bleu", response_model=schemas.BleuResponse)
    def bleu(req: schemas.BleuRequest) -> schemas.BleuResponse:
        report = corpus_bleu(
            [tokenize(s) for s in req.hypotheses],
            [tokenize(s) for s in req.references],
            max_order=req.max_order,
            lowercase=req.lowercase,
            smoothing=req.smoothing,
        )
        return schemas.BleuResponse(
            score=report.score,
            precisions=list(report.precisions),
            brevity_penalty=report.brevity_penalty,
            hyp_len=report.hyp_len,
            ref_len=report.ref_len,
            smoothing=report.smoothing,
            tokenizer=report.tokenizer,
            note=report.note,
        )

    @app.post("/bpe/learn", response_model=schemas.BpeLearnResponse)
    def bpe_learn(req: schemas.BpeLearnRequest) -> schemas.BpeLearnResponse:
        freqs = token_frequencies(tokenize(s) for s in req.sentences)
        model = learn_bpe(freqs, req.num_merges)
        return schemas.BpeLearnResponse(model=dumps_bpe(model), merges=model.num_merges)

    @app.post("/bpe/apply", response_model=schemas.SentencesResponse)
    def bpe_apply(req: schemas.BpeApplyRequest) -> schemas.SentencesResponse:
        encoder = BpeEncoder(loads_bpe(req.model))
        return schemas.SentencesResponse(sentences=[" ".join(encoder.encode(tokenize(s))) for s in req.sentences])

    @app.post("/truecase/train", response_model=schemas.TruecaseTrainResponse)
    def truecase_train(req: schemas.TruecaseTrainRequest) -> schemas.TruecaseTrainResponse:
        model = train_truecaser(s.split() for s in req.sentences)
        return schemas.TruecaseTrainResponse(model=dumps_truecaser(model), types=len(model.counts))

    @app.post("/truecase/apply", response_model=schemas.SentencesResponse)
    def truecase_apply(req: schemas.TruecaseApplyRequest) -> schemas.SentencesResponse:
        model = loads_truecaser(req.model)
        return schemas.SentencesResponse(sentences=[" ".join(apply_truecase(model, s.split())) for s in req.sentences])

    @app.post("/dialect/train", response_model=schemas.DialectTrainResponse)
    def dialect_train(req: schemas.DialectTrainRequest) -> schemas.DialectTrainResponse:
        model = train_dialect(req.msa, req.da, order=req.order)
        return schemas.DialectTrainResponse(model=dumps_dialect(model))

    @app.post("/dialect/classify", response_model=schemas.DialectClassifyResponse)
    def dialect_classify(req: schemas.DialectClassifyRequest) -> schemas.DialectClassifyResponse:
        model = loads_dialect(req.model)
        labels: list[str] = []
        odds: list[float] = []
        for sentence in req.sentences:
            label, log_odds = classify(model, sentence)
            labels.append(label)
            odds.append(log_odds)
        return schemas.DialectClassifyResponse(labels=labels, log_odds=odds)

    @app.post("/dialect/report", response_model=schemas.DialectReportResponse)
    def dialect_report(req: schemas.DialectReportRequest) -> schemas.DialectReportResponse:
        model = loads_dialect(req.model)
        dist = distribution_report(model, req.sentences)
        return schemas.DialectReportResponse(
            total=dist.total,
            msa=dist.msa_count,
            da=dist.da_count,
            msa_percent=dist.msa_percent,
            da_percent=dist.da_percent,
        )

    @app.post("/pipeline/run", response_model=schemas.PipelineRunResponse)
    def pipeline_run(req: schemas.PipelineRunRequest) -> schemas.PipelineRunResponse:
        config = parse_config(req.config)
        report = run_pipeline(config, base_dir=req.base_dir or None)
        return schemas.PipelineRunResponse(funnel=json.loads(funnel_json(report)), table=funnel_table(report))

    return app


app = create_app()
