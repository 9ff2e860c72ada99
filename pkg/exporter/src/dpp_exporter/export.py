"""Export per-cluster embedding and similarity tables for dppsum.

Embedding rows follow the consumer's global sentence order (documents
concatenated, then sentences). Rows are quantized to float32 before the
similarity pass so the emitted DPPS really is (1 + cos)/2 of the emitted
DPPE rows, not of some higher-precision shadow copy. Writes are atomic:
tables land under a temporary name and are renamed into place.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dppsum import (
    ClusterInstance,
    EmbeddingTable,
    PairSimilarityTable,
    load_clusters,
    save_embeddings,
    save_pair_similarity,
)

from .encoders import build_encoder

VALID_MAX_LEN = (64, 128)


@dataclass(frozen=True)
class ExportJob:
    clusters: str | Path
    out_dir: str | Path
    encoder: str = "hash"
    max_len: int = 64
    batch_size: int = 32
    pooling: str = "mean"

    def __post_init__(self):
        if self.max_len not in VALID_MAX_LEN:
            raise ValueError(f"max_len must be one of {VALID_MAX_LEN}, got {self.max_len}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")


def pair_similarity(rows: np.ndarray) -> np.ndarray:
    """Map embedding rows to (1 + cosine)/2, symmetric with unit diagonal."""
    rows = np.asarray(rows, dtype=np.float64)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    unit = np.divide(rows, norms, out=np.zeros_like(rows), where=norms > 0)
    gram = unit @ unit.T
    gram = (gram + gram.T) / 2.0
    s = np.clip((1.0 + gram) / 2.0, 0.0, 1.0)
    np.fill_diagonal(s, 1.0)
    return s


def _atomic_write(path: Path, write_fn) -> None:
    handle = tempfile.NamedTemporaryFile(
        dir=path.parent, prefix=path.name + ".", suffix=".tmp", delete=False
    )
    tmp = Path(handle.name)
    handle.close()
    try:
        write_fn(tmp)
        # NamedTemporaryFile creates 0600; give the final file umask defaults
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def encode_clusters(job: ExportJob) -> list[tuple[ClusterInstance, np.ndarray]]:
    """Load clusters and embed every sentence; rows arrive float32-exact."""
    clusters = load_clusters(job.clusters)
    encoder = build_encoder(job.encoder, job.pooling, job.max_len, job.batch_size)
    pairs = []
    for cluster in clusters:
        rows = encoder.encode(cluster.sentences())
        pairs.append((cluster, rows.astype("<f4").astype(np.float64)))
    return pairs


def _write_tables(job: ExportJob, pairs, kinds) -> list[Path]:
    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for cluster, rows in pairs:
        n = cluster.sentence_count
        if "embeddings" in kinds:
            path = out_dir / f"{cluster.cluster_id}.dppe"
            table = EmbeddingTable(n, rows.shape[1], rows)
            _atomic_write(path, lambda tmp, t=table: save_embeddings(tmp, t))
            written.append(path)
        if "similarity" in kinds:
            path = out_dir / f"{cluster.cluster_id}.dpps"
            table = PairSimilarityTable(n, pair_similarity(rows))
            _atomic_write(path, lambda tmp, t=table: save_pair_similarity(tmp, t))
            written.append(path)
    return written


def export_embeddings(job: ExportJob) -> list[Path]:
    """Write one DPPE file per cluster; returns the paths."""
    return _write_tables(job, encode_clusters(job), kinds=("embeddings",))


def export_similarity(job: ExportJob) -> list[Path]:
    """Write one DPPS file per cluster; returns the paths."""
    return _write_tables(job, encode_clusters(job), kinds=("similarity",))


def export_all(job: ExportJob) -> list[Path]:
    """Write both tables per cluster, encoding each cluster only once."""
    return _write_tables(job, encode_clusters(job), kinds=("embeddings", "similarity"))
