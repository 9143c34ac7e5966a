"""Retrieval-augmented generation with coordinated semantic alignment
and explicit evidence constraints, at a scale where every stage is
testable against an independent oracle."""

from .aggregation import EvidenceAggregate, EvidenceWeights, aggregate, normalize_weights
from .data import QASample, SyntheticSpec, generate_synthetic, load_hotpotqa
from .decoder import (
    DecoderParams,
    GenerationTrace,
    decode_greedy,
    decode_sample,
    init_decoder_params,
)
from .encoder import EncoderParams, SemanticVector, encode, init_encoder_params
from .evaluation import (
    EvalReport,
    SweepResult,
    evaluate,
    sweep_alignment_weight,
    sweep_top_k,
)
from .index import (
    EvidenceChunk,
    EvidenceIndex,
    RetrievalResult,
    alignment_score,
    build_index,
    filter_by_threshold,
    load_index,
    save_index,
    top_k,
)
from .metrics import (
    MetricReport,
    bleu,
    exact_match,
    normalize_answer,
    rouge_l,
    score_corpus,
    token_f1,
)
from .training import (
    Checkpoint,
    LossBreakdown,
    TrainConfig,
    consistency_loss,
    joint_loss,
    load_checkpoint,
    nll_loss,
    save_checkpoint,
    train,
)
from .vocab import Vocabulary, tokenize

__version__ = "0.1.0"

__all__ = [
    "Checkpoint",
    "DecoderParams",
    "EncoderParams",
    "EvalReport",
    "EvidenceAggregate",
    "EvidenceChunk",
    "EvidenceIndex",
    "EvidenceWeights",
    "GenerationTrace",
    "LossBreakdown",
    "MetricReport",
    "QASample",
    "RetrievalResult",
    "SemanticVector",
    "SweepResult",
    "SyntheticSpec",
    "TrainConfig",
    "Vocabulary",
    "aggregate",
    "alignment_score",
    "bleu",
    "build_index",
    "consistency_loss",
    "decode_greedy",
    "decode_sample",
    "encode",
    "evaluate",
    "exact_match",
    "filter_by_threshold",
    "generate_synthetic",
    "init_decoder_params",
    "init_encoder_params",
    "joint_loss",
    "load_checkpoint",
    "load_hotpotqa",
    "load_index",
    "nll_loss",
    "normalize_answer",
    "normalize_weights",
    "rouge_l",
    "save_checkpoint",
    "save_index",
    "score_corpus",
    "sweep_alignment_weight",
    "sweep_top_k",
    "token_f1",
    "tokenize",
    "top_k",
    "train",
]
