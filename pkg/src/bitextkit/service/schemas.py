"""Request/response models for the HTTP service.

Trained models travel as their on-disk text serialization in a ``model``
string field, so clients can persist them as-is and feed them back later.
"""
from __future__ import annotations

from pydantic import BaseModel, Field

from ..bleu import DEFAULT_MAX_ORDER, SMOOTHING_NONE
from ..bpe import DEFAULT_NUM_MERGES
from ..dedup import MODE_PAIR
from ..dialect import DEFAULT_ORDER
from ..qa import (
    DEFAULT_BAND_HIGH,
    DEFAULT_BAND_LOW,
    DEFAULT_CONTAINMENT_ORDER,
    DEFAULT_CONTAINMENT_THRESHOLD,
)


class Pair(BaseModel):
    src: str
    tgt: str


class HealthResponse(BaseModel):
    status: str
    version: str
    tokenizer: str


class DatasetInfo(BaseModel):
    name: str
    src_lang: str
    tgt_lang: str
    declared_size: int
    dialect_region: str


class RegionTotalsResponse(BaseModel):
    totals: dict[str, int]


class NormalizeRequest(BaseModel):
    text: str
    strip: bool = True
    mask: bool = True


class NormalizeResponse(BaseModel):
    text: str


class TokenizeRequest(BaseModel):
    text: str


class TokenizeResponse(BaseModel):
    tokens: list[str]
    detokenized: str


class ScoreRequest(BaseModel):
    pairs: list[Pair]


class ScoreResponse(BaseModel):
    scores: list[float]


class BandRequest(BaseModel):
    pairs: list[Pair]
    low: float = DEFAULT_BAND_LOW
    high: float = DEFAULT_BAND_HIGH


class BandResponse(BaseModel):
    kept: list[Pair]
    removed_low: list[Pair]
    removed_high: list[Pair]


class ContainmentRequest(BaseModel):
    pairs: list[Pair]
    threshold: float = DEFAULT_CONTAINMENT_THRESHOLD
    order: int = DEFAULT_CONTAINMENT_ORDER


class ContainmentResponse(BaseModel):
    kept: list[Pair]
    removed: list[Pair]
    ratios: list[float]


class DedupRequest(BaseModel):
    pairs: list[Pair]
    mode: str = MODE_PAIR
    strict: bool = False


class DedupResponse(BaseModel):
    kept: list[Pair]
    removed: int


class SplitRequest(BaseModel):
    pairs: list[Pair]
    n_dev: int = Field(ge=0)
    seed: int = 0


class SplitResponse(BaseModel):
    train: list[Pair]
    dev: list[Pair]


class BleuRequest(BaseModel):
    hypotheses: list[str]
    references: list[str]
    max_order: int = DEFAULT_MAX_ORDER
    smoothing: str = SMOOTHING_NONE
    lowercase: bool = False


class BleuResponse(BaseModel):
    score: float
    precisions: list[tuple[int, int]]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    smoothing: str
    tokenizer: str
    note: str


class BpeLearnRequest(BaseModel):
    sentences: list[str]
    num_merges: int = DEFAULT_NUM_MERGES


class BpeLearnResponse(BaseModel):
    model: str
    merges: int


class BpeApplyRequest(BaseModel):
    model: str
    sentences: list[str]


class SentencesResponse(BaseModel):
    sentences: list[str]


class TruecaseTrainRequest(BaseModel):
    sentences: list[str]


class TruecaseTrainResponse(BaseModel):
    model: str
    types: int


class TruecaseApplyRequest(BaseModel):
    model: str
    sentences: list[str]


class DialectTrainRequest(BaseModel):
    msa: list[str]
    da: list[str]
    order: int = DEFAULT_ORDER


class DialectTrainResponse(BaseModel):
    model: str


class DialectClassifyRequest(BaseModel):
    model: str
    sentences: list[str]


class DialectClassifyResponse(BaseModel):
    labels: list[str]
    log_odds: list[float]


class DialectReportRequest(BaseModel):
    model: str
    sentences: list[str]


class DialectReportResponse(BaseModel):
    total: int
    msa: int
    da: int
    msa_percent: float
    da_percent: float


class PipelineRunRequest(BaseModel):
    config: str
    base_dir: str = ""


class PipelineRunResponse(BaseModel):
    funnel: dict
    table: str
