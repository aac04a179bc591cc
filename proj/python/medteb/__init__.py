"""Python bindings for the medteb benchmark toolkit."""

from ._medteb import (
    MedtebError,
    ProviderError,
    TaskError,
    ValidationError,
    aggregate,
    build,
    dedup,
    evaluate,
    first_sentence,
    macro_f1,
    ndcg_at_k,
    pair_score,
    preprocess_text,
    train_head,
    v_measure,
)

__all__ = [
    "MedtebError",
    "ProviderError",
    "TaskError",
    "ValidationError",
    "aggregate",
    "build",
    "dedup",
    "evaluate",
    "first_sentence",
    "macro_f1",
    "ndcg_at_k",
    "pair_score",
    "preprocess_text",
    "train_head",
    "v_measure",
]
