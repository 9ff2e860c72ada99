"""Budgeted extractive multi-document summarization with a DPP.

Sentence quality comes from a trained log-linear model, diversity from a
fused similarity matrix; summaries are greedy MAP subsets of the resulting
determinantal point process under a word budget, scored with ROUGE.
"""

from .dpp import (
    JITTER,
    LEnsemble,
    MarginalKernel,
    ModelBundle,
    QualityModel,
    TrainConfig,
    TrainResult,
    TrainingInstance,
    build_l_ensemble,
    gradient,
    load_model,
    log_likelihood,
    log_normalizer,
    log_prob,
    map_greedy,
    marginal_kernel,
    quality_scores,
    save_model,
    train,
)
from .errors import (
    ClusterFormatError,
    ConfigurationError,
    InvalidSimilarityError,
    NumericError,
    TableFormatError,
    TrainingDivergedError,
)
from .features import (
    SURFACE_DIM,
    SentenceRecord,
    SurfaceFeatures,
    TfidfModel,
    apply_zscore,
    concat_features,
    fit_tfidf,
    fit_zscore,
    fuse_similarity,
    pairwise_cosine_matrix,
    psd_repair,
    surface_features,
    tfidf_cosine,
    tokenize,
    validate_similarity,
)
from .ingestion import (
    ClusterInstance,
    Document,
    EmbeddingTable,
    PairSimilarityTable,
    load_clusters,
    load_embeddings,
    load_pair_similarity,
    oracle_labels,
    save_embeddings,
    save_pair_similarity,
    write_clusters,
)
from .pipeline import (
    FEATURE_MODES,
    PreparedCluster,
    SummaryRow,
    derive_labels,
    evaluate_summaries,
    load_summaries,
    prepare_cluster,
    render_report,
    summarize_clusters,
    train_clusters,
    write_summaries,
)
from .rouge import EvalConfig, RougeScore, evaluate, rouge_n, rouge_su4
from .stem import porter_stem

__version__ = "0.1.0"

__all__ = [
    "ClusterFormatError",
    "ClusterInstance",
    "ConfigurationError",
    "Document",
    "EmbeddingTable",
    "EvalConfig",
    "FEATURE_MODES",
    "InvalidSimilarityError",
    "JITTER",
    "LEnsemble",
    "MarginalKernel",
    "ModelBundle",
    "NumericError",
    "PairSimilarityTable",
    "PreparedCluster",
    "QualityModel",
    "RougeScore",
    "SummaryRow",
    "SURFACE_DIM",
    "SentenceRecord",
    "SurfaceFeatures",
    "TableFormatError",
    "TfidfModel",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "TrainingInstance",
    "apply_zscore",
    "build_l_ensemble",
    "concat_features",
    "derive_labels",
    "evaluate",
    "evaluate_summaries",
    "fit_tfidf",
    "fit_zscore",
    "fuse_similarity",
    "gradient",
    "load_clusters",
    "load_embeddings",
    "load_model",
    "load_pair_similarity",
    "load_summaries",
    "log_likelihood",
    "log_normalizer",
    "log_prob",
    "map_greedy",
    "marginal_kernel",
    "oracle_labels",
    "pairwise_cosine_matrix",
    "porter_stem",
    "prepare_cluster",
    "psd_repair",
    "quality_scores",
    "render_report",
    "rouge_n",
    "rouge_su4",
    "save_embeddings",
    "save_model",
    "save_pair_similarity",
    "summarize_clusters",
    "surface_features",
    "tfidf_cosine",
    "tokenize",
    "train",
    "train_clusters",
    "validate_similarity",
    "write_clusters",
    "write_summaries",
]
