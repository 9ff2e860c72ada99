"""Sentence features and similarity matrices.

Surface features are [word count, 1-based position, TF-IDF cosine with the
owning document]; z-scoring uses training-split statistics persisted with the
model. Similarity fusion blends a learned matrix with TF-IDF cosines and
projects the result back onto the PSD cone.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidSimilarityError

SURFACE_DIM = 3

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs; empty tokens dropped."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class SentenceRecord:
    text: str
    doc_id: str
    position_in_doc: int  # 1-based
    word_count: int
    embedding: np.ndarray | None = None

    def __post_init__(self):
        if self.position_in_doc < 1:
            raise ConfigurationError(f"position_in_doc must be >= 1, got {self.position_in_doc}")

    @classmethod
    def from_text(
        cls, text: str, doc_id: str, position_in_doc: int, embedding: np.ndarray | None = None
    ) -> "SentenceRecord":
        return cls(text, doc_id, position_in_doc, len(tokenize(text)), embedding)


@dataclass(frozen=True)
class SurfaceFeatures:
    v: np.ndarray  # [word_count, position_in_doc, tfidf cosine], pre z-score


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]  # term -> dense column index
    idf: np.ndarray
    doc_count: int


def fit_tfidf(documents: list[list[str]]) -> TfidfModel:
    """idf(t) = ln((1 + n_docs)/(1 + df(t))) + 1 over token-list documents."""
    if not documents:
        raise ConfigurationError("fit_tfidf requires at least one document")
    df: dict[str, int] = {}
    for tokens in documents:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    vocabulary = {term: i for i, term in enumerate(sorted(df))}
    n_docs = len(documents)
    idf = np.empty(len(vocabulary))
    for term, i in vocabulary.items():
        idf[i] = np.log((1.0 + n_docs) / (1.0 + df[term])) + 1.0
    return TfidfModel(vocabulary, idf, n_docs)


def _tfidf_vector(tokens: list[str], model: TfidfModel) -> np.ndarray:
    """L2-normalized raw-count TF-IDF vector; out-of-vocabulary terms ignored."""
    vec = np.zeros(len(model.vocabulary))
    for term in tokens:
        i = model.vocabulary.get(term)
        if i is not None:
            vec[i] += model.idf[i]
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def tfidf_cosine(a: list[str], b: list[str], model: TfidfModel) -> float:
    """Cosine of L2-normalized TF-IDF vectors; 0 when either side is all-zero."""
    va = _tfidf_vector(a, model)
    vb = _tfidf_vector(b, model)
    return float(np.clip(va @ vb, 0.0, 1.0))


def surface_features(
    sent: SentenceRecord, doc_tokens: list[str], model: TfidfModel
) -> SurfaceFeatures:
    cos = tfidf_cosine(tokenize(sent.text), doc_tokens, model)
    return SurfaceFeatures(np.array([float(sent.word_count), float(sent.position_in_doc), cos]))


def fit_zscore(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and population std over the training split."""
    rows = np.asarray(rows, dtype=float)
    return rows.mean(axis=0), rows.std(axis=0)


def apply_zscore(v: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Standardize; constant dimensions (std 0) map to 0."""
    v = np.asarray(v, dtype=float)
    return np.where(std > 0, (v - mean) / np.where(std > 0, std, 1.0), 0.0)


def concat_features(
    u: np.ndarray | None, v_scored: np.ndarray, mode: str
) -> np.ndarray:
    if mode == "surface":
        return np.asarray(v_scored, dtype=float)
    if mode not in ("embeddings", "combined"):
        raise ConfigurationError(f"unknown feature mode {mode!r}")
    if u is None:
        raise ConfigurationError(f"feature mode {mode!r} requires an embedding")
    u = np.asarray(u, dtype=float)
    if mode == "embeddings":
        return u
    return np.concatenate([u, np.asarray(v_scored, dtype=float)])


def pairwise_cosine_matrix(sentences: list[list[str]], model: TfidfModel) -> np.ndarray:
    """Gram matrix of unit TF-IDF vectors; all-zero sentences similar only to themselves."""
    if not sentences:
        raise ConfigurationError("pairwise_cosine_matrix requires at least one sentence")
    rows = np.stack([_tfidf_vector(tokens, model) for tokens in sentences])
    c = np.clip(rows @ rows.T, 0.0, 1.0)
    c = (c + c.T) / 2.0
    np.fill_diagonal(c, 1.0)
    return c


def _require_symmetric(s: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidSimilarityError(f"expected a square matrix, got shape {s.shape}")
    skew = np.abs(s - s.T).max() if s.size else 0.0
    if skew > tol:
        raise InvalidSimilarityError(f"matrix is asymmetric: max |S - S^T| = {skew:.3g}")
    return s


def validate_similarity(s: np.ndarray) -> np.ndarray:
    """Check similarity invariants: symmetric, unit diagonal, entries in [0, 1]."""
    s = _require_symmetric(s)
    if s.size:
        diag_err = np.abs(np.diagonal(s) - 1.0).max()
        if diag_err > 1e-9:
            raise InvalidSimilarityError(f"similarity diagonal must be 1 (off by {diag_err:.3g})")
        if s.min() < -1e-9 or s.max() > 1.0 + 1e-9:
            raise InvalidSimilarityError("similarity entries must lie in [0, 1]")
    return s


def psd_repair(s: np.ndarray) -> np.ndarray:
    """Project a symmetric matrix to a PSD similarity with unit diagonal.

    Negative eigenvalues are clipped to zero, the result rescaled back to a
    unit diagonal, and entries clipped to [0,1]. Already-PSD unit-diagonal
    input passes through unchanged.
    """
    s = _require_symmetric(s)
    n = s.shape[0]
    if n == 0:
        return s.copy()
    sym = (s + s.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    diag_ok = np.abs(np.diagonal(sym) - 1.0).max() <= 1e-12
    if eigvals[0] >= -1e-12 and diag_ok:
        # already in the feasible set: the projection is the identity map
        out = np.clip(s, 0.0, 1.0)
        np.fill_diagonal(out, 1.0)
        return out
    rebuilt = (eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.T
    rebuilt = (rebuilt + rebuilt.T) / 2.0
    scale = np.sqrt(np.clip(np.diagonal(rebuilt), 0.0, None))
    scale = np.where(scale > 0, scale, 1.0)  # zero rows stay zero off-diagonal
    out = np.clip(rebuilt / np.outer(scale, scale), 0.0, 1.0)
    np.fill_diagonal(out, 1.0)
    return out


def fuse_similarity(s_learned: np.ndarray, c: np.ndarray, alpha: float) -> np.ndarray:
    """alpha * learned + (1 - alpha) * cosine, then PSD repair, diagonal pinned to 1."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must be in [0, 1], got {alpha}")
    s_learned = _require_symmetric(s_learned)
    c = _require_symmetric(c)
    if s_learned.shape != c.shape:
        raise InvalidSimilarityError(
            f"similarity shapes differ: {s_learned.shape} vs {c.shape}"
        )
    fused = alpha * s_learned + (1.0 - alpha) * c
    return psd_repair(fused)
