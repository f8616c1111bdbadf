"""Curation toolkit for Arabic-English bitext: filtering, dedup, splits,
subword learning, truecasing, dialect identification, BLEU, and a streaming
pipeline that chains them."""

__version__ = "0.1.0"

from .bleu import BleuReport, corpus_bleu, report_json, report_text
from .bpe import (
    DEFAULT_NUM_MERGES,
    BpeEncoder,
    BpeModel,
    apply_bpe,
    decode_bpe,
    learn_bpe,
    load_bpe,
    save_bpe,
    token_frequencies,
)
from .corpus import (
    FORMAT_SPLIT,
    FORMAT_TSV,
    FORMATS,
    BitextError,
    SentencePair,
    read_bitext,
    read_lines,
    write_bitext,
)
from .dedup import MODE_PAIR, MODE_SRC_ONLY, MODE_TGT_ONLY, canonical_key, dedup_exact, fingerprint, iter_dedup
from .dialect import (
    LABEL_DA,
    LABEL_MSA,
    DialectModel,
    classify,
    distribution_report,
    load_dialect,
    save_dialect,
    train_dialect,
)
from .normalize import TOKENIZER_VERSION, detokenize, mask_entities, strip_diacritics, tokenize
from .pipeline import (
    FunnelReport,
    PipelineConfig,
    build_training_mix,
    config_text,
    funnel_json,
    funnel_table,
    parse_config,
    parse_funnel,
    run_pipeline,
    run_pipeline_file,
)
from .qa import (
    DEFAULT_BAND_HIGH,
    DEFAULT_BAND_LOW,
    DEFAULT_CONTAINMENT_ORDER,
    DEFAULT_CONTAINMENT_THRESHOLD,
    SidecarScorer,
    band_filter,
    containment_filter,
    containment_ratio,
    containment_sweep,
    cosine_pair_score,
    lexical_overlap_score,
    normalize_pair,
    pair_containment,
)
from .registry import DatasetEntry, load_registry, region_totals, registry_lookup
from .split import DEFAULT_DEV_SIZE, DIALECT_DEV_SIZE, SplitSpec, dev_index_set, sample_split
from .truecase import TruecaseModel, apply_truecase, load_truecaser, save_truecaser, train_truecaser
