"""BRIDGE retrieval toolkit: query alignment (FORGE) + dense retrieval (LENS).

Thin Python surface over the C++ core. See the README for the pipeline
layout and the `bridge` CLI for the full experiment harness.
"""

from ._core import (  # noqa: F401
    MAX_ALIGNED_WORDS,
    AlignedQuery,
    BridgeError,
    ContrastiveInstance,
    Corpus,
    Document,
    EncoderParameters,
    InvertedIndex,
    LensTrainConfig,
    PolicyParameters,
    VectorIndex,
    build_vector_index,
    compose_and_rewrite,
    cosine,
    dense_search,
    encode_text,
    evaluate_config,
    gen_synthetic,
    gradient_check,
    grpo_advantages,
    idf_from_df,
    infonce_loss,
    init_encoder,
    load_corpus,
    load_encoder,
    load_policy,
    ndcg_at_k,
    recall_at_k,
    save_corpus,
    save_encoder,
    save_policy,
    tokenize,
)

__all__ = [
    "MAX_ALIGNED_WORDS",
    "AlignedQuery",
    "BridgeError",
    "ContrastiveInstance",
    "Corpus",
    "Document",
    "EncoderParameters",
    "InvertedIndex",
    "LensTrainConfig",
    "PolicyParameters",
    "VectorIndex",
    "build_vector_index",
    "compose_and_rewrite",
    "cosine",
    "dense_search",
    "encode_text",
    "evaluate_config",
    "gen_synthetic",
    "gradient_check",
    "grpo_advantages",
    "idf_from_df",
    "infonce_loss",
    "init_encoder",
    "load_corpus",
    "load_encoder",
    "load_policy",
    "ndcg_at_k",
    "recall_at_k",
    "save_corpus",
    "save_encoder",
    "save_policy",
    "tokenize",
]
