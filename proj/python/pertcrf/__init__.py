"""CRF taggers for Persian ezafe recognition and POS tagging."""

from ._pertcrf import (
    Corpus,
    DataError,
    Model,
    TrainingError,
    UsageError,
    bayes_decode,
    filter_long,
    pipeline_tag,
    presets,
    shannon_index,
    split,
    stats,
    synthesize,
    train,
)

__all__ = [
    "Corpus",
    "DataError",
    "Model",
    "TrainingError",
    "UsageError",
    "bayes_decode",
    "filter_long",
    "pipeline_tag",
    "presets",
    "shannon_index",
    "split",
    "stats",
    "synthesize",
    "train",
]
