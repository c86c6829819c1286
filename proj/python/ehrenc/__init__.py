"""Python bindings for the ehrenc C++ library."""

from ._core import (
    EhrencError,
    Vocabulary,
    __version__,
    analyze,
    audit,
    auroc,
    cnn_plan,
    compression_rate,
    corpus_counts,
    digit_places,
    generate_corpus,
    hamming,
    membership_attack,
    mirror_decoder,
    quantize,
    search_grid,
    timegap_bucket,
    token_accuracy,
    transformer_plan,
)

__all__ = [
    "EhrencError",
    "Vocabulary",
    "__version__",
    "analyze",
    "audit",
    "auroc",
    "cnn_plan",
    "compression_rate",
    "corpus_counts",
    "digit_places",
    "generate_corpus",
    "hamming",
    "membership_attack",
    "mirror_decoder",
    "quantize",
    "search_grid",
    "timegap_bucket",
    "token_accuracy",
    "transformer_plan",
]
