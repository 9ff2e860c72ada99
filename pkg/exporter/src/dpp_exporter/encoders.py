"""Sentence encoders for the export pipeline.

The default "hash" encoder is a fully offline feature-hashing stand-in for a
pretrained model: each token hashes to a signed coordinate, token vectors are
pooled, and the result is L2-normalized. It is a pure function of the text,
so duplicated sentences always share one embedding row. Any other encoder
name is handed to sentence-transformers; those models apply their own
pooling head.
"""

from __future__ import annotations

import hashlib

import numpy as np

from dppsum import tokenize

DEFAULT_HASH_DIM = 256


class EncoderError(RuntimeError):
    """Encoder could not be constructed or loaded."""


class HashEncoder:
    def __init__(self, dim: int = DEFAULT_HASH_DIM, pooling: str = "mean", max_len: int = 64):
        if dim < 1:
            raise EncoderError(f"hash dimension must be positive, got {dim}")
        if pooling not in ("mean", "max"):
            raise EncoderError(f"unknown pooling {pooling!r}")
        self.dim = dim
        self.pooling = pooling
        self.max_len = max_len

    def _token_coordinate(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9).digest()
        index = int.from_bytes(digest[:8], "little") % self.dim
        sign = 1.0 if digest[8] & 1 else -1.0
        return index, sign

    def encode(self, texts: list[str]) -> np.ndarray:
        rows = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            tokens = tokenize(text)[: self.max_len]
            if not tokens:
                continue
            if self.pooling == "mean":
                for token in tokens:
                    index, sign = self._token_coordinate(token)
                    rows[i, index] += sign / len(tokens)
            else:
                for token in tokens:
                    index, sign = self._token_coordinate(token)
                    rows[i, index] = max(rows[i, index], sign)
            norm = np.linalg.norm(rows[i])
            if norm > 0:
                rows[i] /= norm
        return rows


class TransformerEncoder:
    def __init__(self, name: str, max_len: int = 64, batch_size: int = 32):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                f"encoder {name!r} needs the sentence-transformers package: {exc}"
            ) from exc
        try:
            self._model = SentenceTransformer(name, device="cpu")
        except Exception as exc:
            raise EncoderError(f"could not load encoder {name!r}: {exc}") from exc
        self._model.eval()
        self._model.max_seq_length = max_len
        self._batch_size = batch_size
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        encoded = self._model.encode(
            list(texts),
            batch_size=self._batch_size,
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        return np.asarray(encoded, dtype=np.float64)


def build_encoder(name: str, pooling: str, max_len: int, batch_size: int):
    """Resolve an encoder name: 'hash', 'hash-<dim>', or a model identifier."""
    if name == "hash":
        return HashEncoder(DEFAULT_HASH_DIM, pooling, max_len)
    if name.startswith("hash-"):
        try:
            dim = int(name.removeprefix("hash-"))
        except ValueError:
            raise EncoderError(f"invalid hash encoder name {name!r}") from None
        return HashEncoder(dim, pooling, max_len)
    return TransformerEncoder(name, max_len, batch_size)
