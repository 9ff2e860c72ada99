"""Embedding and similarity table exporter for the dppsum summarizer."""

from .encoders import DEFAULT_HASH_DIM, EncoderError, HashEncoder, TransformerEncoder, build_encoder
from .export import (
    ExportJob,
    encode_clusters,
    export_all,
    export_embeddings,
    export_similarity,
    pair_similarity,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_HASH_DIM",
    "EncoderError",
    "ExportJob",
    "HashEncoder",
    "TransformerEncoder",
    "build_encoder",
    "encode_clusters",
    "export_all",
    "export_embeddings",
    "export_similarity",
    "pair_similarity",
]
