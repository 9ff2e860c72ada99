"""End-to-end drivers shared by the CLI: train, summarize, evaluate.

Feature layout is fixed here: embeddings first, then the three z-scored
surface columns. Z-score statistics always come from the training clusters
and travel with the model, so summarize never refits anything.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dpp import (
    ModelBundle,
    QualityModel,
    TrainConfig,
    TrainingInstance,
    map_greedy,
    quality_scores,
    train,
)
from .errors import ClusterFormatError, ConfigurationError
from .features import (
    SURFACE_DIM,
    SentenceRecord,
    apply_zscore,
    fit_tfidf,
    fit_zscore,
    fuse_similarity,
    pairwise_cosine_matrix,
    surface_features,
    tokenize,
)
from .ingestion import (
    ClusterInstance,
    load_embeddings,
    load_pair_similarity,
    oracle_labels,
)
from .rouge import EvalConfig, evaluate

FEATURE_MODES = ("embeddings", "surface", "combined")


@dataclass(frozen=True)
class PreparedCluster:
    cluster: ClusterInstance
    surface_raw: np.ndarray  # N x 3, pre z-score
    embeddings: np.ndarray | None  # N x d
    similarity: np.ndarray  # fused, PSD, unit diagonal
    word_counts: list[int]


@dataclass(frozen=True)
class SummaryRow:
    cluster_id: str
    selected: list[tuple[int, int]]
    text: str


def _embedding_path(directory: str | Path, cluster_id: str) -> Path:
    return Path(directory) / f"{cluster_id}.dppe"


def _similarity_path(directory: str | Path, cluster_id: str) -> Path:
    return Path(directory) / f"{cluster_id}.dpps"


def prepare_cluster(
    cluster: ClusterInstance,
    embeddings_dir: str | Path | None,
    similarity_dir: str | Path | None,
    alpha: float,
    need_embeddings: bool,
) -> PreparedCluster:
    n = cluster.sentence_count
    doc_tokens = [tokenize(" ".join(doc.sentences)) for doc in cluster.documents]
    tfidf = fit_tfidf(doc_tokens)
    sentence_tokens = [tokenize(text) for text in cluster.sentences()]
    cosine = pairwise_cosine_matrix(sentence_tokens, tfidf)

    if similarity_dir is not None:
        learned = load_pair_similarity(_similarity_path(similarity_dir, cluster.cluster_id), n)
        similarity = fuse_similarity(learned.matrix, cosine, alpha)
    elif alpha == 0.0:
        similarity = fuse_similarity(cosine, cosine, 0.0)
    else:
        raise ConfigurationError(
            f"cluster {cluster.cluster_id}: a similarity directory is required when alpha > 0"
        )

    surface_rows = np.empty((n, SURFACE_DIM))
    word_counts = []
    row = 0
    for d, doc in enumerate(cluster.documents):
        for position, text in enumerate(doc.sentences, start=1):
            record = SentenceRecord.from_text(text, doc.doc_id, position)
            surface_rows[row] = surface_features(record, doc_tokens[d], tfidf).v
            word_counts.append(record.word_count)
            row += 1

    rows = None
    if need_embeddings:
        if embeddings_dir is None:
            raise ConfigurationError(
                f"cluster {cluster.cluster_id}: an embeddings directory is required "
                f"for this feature mode"
            )
        rows = load_embeddings(_embedding_path(embeddings_dir, cluster.cluster_id), n).rows
    return PreparedCluster(cluster, surface_rows, rows, similarity, word_counts)


def _check_embedding_width(prepared: list[PreparedCluster], expected: int | None) -> int:
    width = expected
    for prep in prepared:
        if prep.embeddings is None:
            continue
        d = prep.embeddings.shape[1]
        if width is None:
            width = d
        elif d != width:
            raise ConfigurationError(
                f"cluster {prep.cluster.cluster_id}: expected embedding width {width}, found {d}"
            )
    return width or 0


def _feature_matrix(
    prep: PreparedCluster, mode: str, mean: np.ndarray, std: np.ndarray
) -> np.ndarray:
    if mode == "surface":
        return apply_zscore(prep.surface_raw, mean, std)
    if mode == "embeddings":
        return prep.embeddings
    return np.hstack([prep.embeddings, apply_zscore(prep.surface_raw, mean, std)])


def _gold_global(cluster: ClusterInstance) -> tuple[int, ...]:
    if cluster.gold_extractive is None:
        raise ConfigurationError(
            f"cluster {cluster.cluster_id}: no gold labels; derive them with oracle-labels"
        )
    return tuple(cluster.to_global(d, s) for d, s in cluster.gold_extractive)


def derive_labels(clusters: list[ClusterInstance], budget_words: int) -> list[ClusterInstance]:
    """Fill gold_extractive on every cluster with ROUGE-oracle selections."""
    relabeled = []
    for cluster in clusters:
        labels = oracle_labels(cluster, budget_words)
        if not labels:
            raise ConfigurationError(
                f"cluster {cluster.cluster_id}: oracle produced no labels "
                f"(no sentence improves ROUGE-1)"
            )
        relabeled.append(dataclasses.replace(cluster, gold_extractive=tuple(labels)))
    return relabeled


def train_clusters(
    clusters: list[ClusterInstance],
    embeddings_dir: str | Path | None,
    similarity_dir: str | Path | None,
    alpha: float,
    feature_mode: str,
    config: TrainConfig,
) -> tuple[ModelBundle, list[float]]:
    if feature_mode not in FEATURE_MODES:
        raise ConfigurationError(f"unknown feature mode {feature_mode!r}")
    if not clusters:
        raise ConfigurationError("no clusters to train on")
    need_embeddings = feature_mode != "surface"
    prepared = [
        prepare_cluster(c, embeddings_dir, similarity_dir, alpha, need_embeddings)
        for c in clusters
    ]
    d_embed = _check_embedding_width(prepared, None) if need_embeddings else 0
    use_surface = feature_mode != "embeddings"
    if use_surface:
        mean, std = fit_zscore(np.vstack([p.surface_raw for p in prepared]))
        d_surface = SURFACE_DIM
    else:
        mean, std = np.zeros(0), np.zeros(0)
        d_surface = 0
    instances = [
        TrainingInstance(
            _feature_matrix(p, feature_mode, mean, std), p.similarity, _gold_global(p.cluster)
        )
        for p in prepared
    ]
    result = train(QualityModel.zeros(d_embed, d_surface), instances, config)
    return ModelBundle(result.model, mean, std, alpha), result.trace


def summarize_clusters(
    clusters: list[ClusterInstance],
    bundle: ModelBundle,
    embeddings_dir: str | Path | None,
    similarity_dir: str | Path | None,
    budget_words: int,
) -> list[SummaryRow]:
    mode = bundle.feature_mode
    rows = []
    for cluster in clusters:
        prep = prepare_cluster(
            cluster, embeddings_dir, similarity_dir, bundle.alpha, mode != "surface"
        )
        if prep.embeddings is not None:
            _check_embedding_width([prep], bundle.model.d_embed)
        features = _feature_matrix(prep, mode, bundle.surface_mean, bundle.surface_std)
        q = quality_scores(bundle.model, features)
        # zero-token sentences still occupy one budget slot if ever selected
        counts = [max(1, w) for w in prep.word_counts]
        picked = map_greedy(q, prep.similarity, counts, budget_words)
        texts = cluster.sentences()
        rows.append(
            SummaryRow(
                cluster.cluster_id,
                [cluster.from_global(g) for g in picked],
                " ".join(texts[g] for g in picked),
            )
        )
    return rows


def write_summaries(path_or_handle, rows: list[SummaryRow]) -> None:
    def dump(handle):
        for row in rows:
            payload = {
                "cluster_id": row.cluster_id,
                "selected": [list(pair) for pair in row.selected],
                "text": row.text,
            }
            handle.write(json.dumps(payload) + "\n")

    if hasattr(path_or_handle, "write"):
        dump(path_or_handle)
    else:
        with open(path_or_handle, "w", encoding="utf-8") as handle:
            dump(handle)


def load_summaries(path: str | Path) -> list[SummaryRow]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ClusterFormatError(f"summaries line {line_no}: invalid JSON: {exc}") from exc
            if (
                not isinstance(payload, dict)
                or not isinstance(payload.get("cluster_id"), str)
                or not isinstance(payload.get("selected"), list)
                or not isinstance(payload.get("text"), str)
            ):
                raise ClusterFormatError(
                    f"summaries line {line_no}: need cluster_id, selected, and text"
                )
            selected = []
            for pair in payload["selected"]:
                if not isinstance(pair, list) or len(pair) != 2:
                    raise ClusterFormatError(
                        f"summaries line {line_no}: selected entries are [doc, sentence] pairs"
                    )
                selected.append((int(pair[0]), int(pair[1])))
            rows.append(SummaryRow(payload["cluster_id"], selected, payload["text"]))
    return rows


def evaluate_summaries(
    clusters: list[ClusterInstance], rows: list[SummaryRow]
) -> dict:
    """Score each summary row against its cluster's references."""
    by_id = {c.cluster_id: c for c in clusters}
    per_cluster = []
    totals = {"r1": 0.0, "r2": 0.0, "rsu4": 0.0}
    for row in rows:
        cluster = by_id.get(row.cluster_id)
        if cluster is None:
            raise ConfigurationError(f"summary for unknown cluster {row.cluster_id!r}")
        texts = cluster.sentences()
        sentences = [
            texts[cluster.to_global(d, s)] for d, s in row.selected
        ]
        scores = evaluate(sentences, cluster.references, EvalConfig())
        entry = {"cluster_id": row.cluster_id}
        for key in ("r1", "r2", "rsu4"):
            entry[key] = scores[key].f1
            totals[key] += scores[key].f1
        per_cluster.append(entry)
    if not per_cluster:
        raise ConfigurationError("summaries file is empty")
    mean = {key: totals[key] / len(per_cluster) for key in totals}
    return {"per_cluster": per_cluster, "mean": mean}


def render_report(report: dict) -> str:
    """Fixed 6-decimal float printing so reruns are byte-identical."""
    rounded = {
        "per_cluster": [
            {
                "cluster_id": entry["cluster_id"],
                "r1": round(entry["r1"], 6),
                "r2": round(entry["r2"], 6),
                "rsu4": round(entry["rsu4"], 6),
            }
            for entry in report["per_cluster"]
        ],
        "mean": {key: round(value, 6) for key, value in report["mean"].items()},
    }
    return json.dumps(rounded, indent=2) + "\n"
