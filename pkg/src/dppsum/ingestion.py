"""Cluster, embedding, and similarity file I/O plus oracle gold labels.

Cluster files are JSON Lines with pre-split sentences; embeddings and
pairwise similarities arrive in small binary tables produced externally.
Sentences are indexed globally documents-then-sentences, and that order is
the row order of every table.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ClusterFormatError, TableFormatError
from .features import tokenize
from .rouge import EvalConfig, evaluate

EMBEDDING_MAGIC = b"DPPE"
SIMILARITY_MAGIC = b"DPPS"


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[str, ...]


@dataclass(frozen=True)
class ClusterInstance:
    cluster_id: str
    documents: tuple[Document, ...]
    references: tuple[str, ...]
    gold_extractive: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if not self.documents:
            raise ClusterFormatError(f"cluster {self.cluster_id}: no documents")
        for doc in self.documents:
            if not doc.sentences:
                raise ClusterFormatError(
                    f"cluster {self.cluster_id}: document {doc.doc_id} has no sentences"
                )
        if not self.references:
            raise ClusterFormatError(f"cluster {self.cluster_id}: no references")
        if self.gold_extractive is not None:
            if not self.gold_extractive:
                raise ClusterFormatError(f"cluster {self.cluster_id}: empty gold_extractive")
            if len(set(self.gold_extractive)) != len(self.gold_extractive):
                raise ClusterFormatError(f"cluster {self.cluster_id}: duplicate gold labels")
            for d, s in self.gold_extractive:
                if not 0 <= d < len(self.documents) or not 0 <= s < len(
                    self.documents[d].sentences
                ):
                    raise ClusterFormatError(
                        f"cluster {self.cluster_id}: gold label ({d}, {s}) out of range"
                    )

    @property
    def sentence_count(self) -> int:
        return sum(len(doc.sentences) for doc in self.documents)

    def sentences(self) -> list[str]:
        """All sentence texts in global order (documents concatenated)."""
        return [text for doc in self.documents for text in doc.sentences]

    def to_global(self, doc_index: int, sentence_index: int) -> int:
        if not 0 <= doc_index < len(self.documents):
            raise IndexError(f"document index {doc_index} out of range")
        if not 0 <= sentence_index < len(self.documents[doc_index].sentences):
            raise IndexError(f"sentence index {sentence_index} out of range")
        offset = sum(len(self.documents[d].sentences) for d in range(doc_index))
        return offset + sentence_index

    def from_global(self, index: int) -> tuple[int, int]:
        remaining = index
        if index >= 0:
            for d, doc in enumerate(self.documents):
                if remaining < len(doc.sentences):
                    return d, remaining
                remaining -= len(doc.sentences)
        raise IndexError(f"global sentence index {index} out of range")


@dataclass(frozen=True)
class EmbeddingTable:
    n: int
    d: int
    rows: np.ndarray


@dataclass(frozen=True)
class PairSimilarityTable:
    n: int
    matrix: np.ndarray


def _parse_cluster(payload: dict, line_no: int) -> ClusterInstance:
    if not isinstance(payload, dict):
        raise ClusterFormatError(f"line {line_no}: expected a JSON object")
    cluster_id = payload.get("cluster_id")
    if not isinstance(cluster_id, str) or not cluster_id:
        raise ClusterFormatError(f"line {line_no}: missing or invalid cluster_id")

    def fail(reason: str):
        raise ClusterFormatError(f"cluster {cluster_id}: {reason}")

    raw_docs = payload.get("documents")
    if not isinstance(raw_docs, list):
        fail("missing 'documents' list")
    documents = []
    for raw in raw_docs:
        if (
            not isinstance(raw, dict)
            or not isinstance(raw.get("doc_id"), str)
            or not isinstance(raw.get("sentences"), list)
            or not all(isinstance(s, str) for s in raw["sentences"])
        ):
            fail("each document needs a doc_id and a list of sentence strings")
        documents.append(Document(raw["doc_id"], tuple(raw["sentences"])))
    references = payload.get("references")
    if not isinstance(references, list) or not all(isinstance(r, str) for r in references):
        fail("missing 'references' list of strings")
    gold = payload.get("gold_extractive")
    if gold is not None:
        if not isinstance(gold, list) or not all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(i, int) for i in p)
            for p in gold
        ):
            fail("'gold_extractive' must be a list of [doc_index, sentence_index] pairs")
        gold = tuple((p[0], p[1]) for p in gold)
    return ClusterInstance(cluster_id, tuple(documents), tuple(references), gold)


def load_clusters(path: str | Path) -> list[ClusterInstance]:
    """Read one cluster per JSON line, preserving file order."""
    clusters = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ClusterFormatError(f"line {line_no}: invalid JSON: {exc}") from exc
            clusters.append(_parse_cluster(payload, line_no))
    return clusters


def write_clusters(path_or_handle, clusters: list[ClusterInstance]) -> None:
    def dump(handle):
        for cluster in clusters:
            payload = {
                "cluster_id": cluster.cluster_id,
                "documents": [
                    {"doc_id": doc.doc_id, "sentences": list(doc.sentences)}
                    for doc in cluster.documents
                ],
                "references": list(cluster.references),
            }
            if cluster.gold_extractive is not None:
                payload["gold_extractive"] = [list(pair) for pair in cluster.gold_extractive]
            handle.write(json.dumps(payload) + "\n")

    if hasattr(path_or_handle, "write"):
        dump(path_or_handle)
    else:
        with open(path_or_handle, "w", encoding="utf-8") as handle:
            dump(handle)


def _read_header(raw: bytes, magic: bytes, n_fields: int, path) -> tuple[int, ...]:
    header = len(magic) + 4 * n_fields
    if raw[: len(magic)] != magic:
        raise TableFormatError(f"{path}: bad magic, expected {magic!r}")
    if len(raw) < header:
        raise TableFormatError(f"{path}: truncated header")
    return struct.unpack("<" + "I" * n_fields, raw[len(magic) : header])


def _read_payload(raw: bytes, header: int, count: int, path) -> np.ndarray:
    expected = header + 4 * count
    if len(raw) < expected:
        raise TableFormatError(f"{path}: truncated payload, expected {expected} bytes")
    if len(raw) > expected:
        raise TableFormatError(f"{path}: {len(raw) - expected} bytes of trailing data")
    return np.frombuffer(raw, dtype="<f4", count=count, offset=header).astype(np.float64)


def load_embeddings(path: str | Path, expected_n: int) -> EmbeddingTable:
    raw = Path(path).read_bytes()
    n, d = _read_header(raw, EMBEDDING_MAGIC, 2, path)
    if n != expected_n:
        raise TableFormatError(f"{path}: has {n} rows, cluster has {expected_n} sentences")
    if d < 1:
        raise TableFormatError(f"{path}: embedding width must be positive")
    rows = _read_payload(raw, len(EMBEDDING_MAGIC) + 8, n * d, path).reshape(n, d)
    if not np.all(np.isfinite(rows)):
        raise TableFormatError(f"{path}: non-finite embedding values")
    return EmbeddingTable(n, d, rows)


def save_embeddings(path: str | Path, table: EmbeddingTable) -> None:
    rows = np.ascontiguousarray(table.rows, dtype="<f4")
    with open(path, "wb") as handle:
        handle.write(EMBEDDING_MAGIC)
        handle.write(struct.pack("<II", table.n, table.d))
        handle.write(rows.tobytes())


def load_pair_similarity(path: str | Path, expected_n: int) -> PairSimilarityTable:
    raw = Path(path).read_bytes()
    (n,) = _read_header(raw, SIMILARITY_MAGIC, 1, path)
    if n != expected_n:
        raise TableFormatError(f"{path}: has {n} rows, cluster has {expected_n} sentences")
    matrix = _read_payload(raw, len(SIMILARITY_MAGIC) + 4, n * n, path).reshape(n, n)
    if not np.all(np.isfinite(matrix)):
        raise TableFormatError(f"{path}: non-finite similarity values")
    skew = np.abs(matrix - matrix.T).max() if n else 0.0
    if skew > 1e-6:
        raise TableFormatError(f"{path}: similarity is asymmetric (max skew {skew:.3g})")
    if n and np.abs(np.diagonal(matrix) - 1.0).max() > 1e-6:
        raise TableFormatError(f"{path}: similarity diagonal must be 1")
    excess = max(float(-matrix.min(initial=0.0)), float(matrix.max(initial=1.0) - 1.0))
    if excess > 0.0:
        if excess > 1e-6:
            warnings.warn(
                f"{path}: similarity entries outside [0, 1] by {excess:.3g}; clamping"
            )
        matrix = np.clip(matrix, 0.0, 1.0)
    return PairSimilarityTable(n, matrix)


def save_pair_similarity(path: str | Path, table: PairSimilarityTable) -> None:
    matrix = np.ascontiguousarray(table.matrix, dtype="<f4")
    with open(path, "wb") as handle:
        handle.write(SIMILARITY_MAGIC)
        handle.write(struct.pack("<I", table.n))
        handle.write(matrix.tobytes())


def oracle_labels(cluster: ClusterInstance, budget_words: int) -> list[tuple[int, int]]:
    """Greedy mean ROUGE-1 F gain against the references under the word budget.

    Mirrors map_greedy's budget handling: candidates must fit the remaining
    budget, ties go to the lowest global index, and when no sentence fits at
    all the single best-gain sentence is returned alone.
    """
    texts = cluster.sentences()
    counts = [len(tokenize(t)) for t in texts]
    config = EvalConfig(limit_words=budget_words, stem=True)

    def score(selection: list[int]) -> float:
        return evaluate([texts[i] for i in selection], cluster.references, config)["r1"].f1

    selected: list[int] = []
    current = 0.0
    used = 0
    while True:
        remaining = budget_words - used
        best_i = -1
        best_score = current
        for i in range(len(texts)):
            if i in selected or counts[i] > remaining or counts[i] == 0:
                continue
            candidate = score(selected + [i])
            if candidate > best_score:
                best_i = i
                best_score = candidate
        if best_i < 0:
            if not selected and counts and min(counts) > budget_words:
                over = [(score([i]), -i) for i in range(len(texts)) if counts[i] > 0]
                top, neg_i = max(over)
                if top > 0.0:
                    selected = [-neg_i]
            break
        selected.append(best_i)
        current = best_score
        used += counts[best_i]
    return [cluster.from_global(i) for i in selected]
