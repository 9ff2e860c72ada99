"""Determinantal point process core: ensembles, likelihood, training, MAP.

The ensemble decomposes as L_ij = q_i * S_ij * q_j with quality
q_i = exp(theta . f(i) / 2); the half keeps the training gradient
sum_{i in gold} f(i) - sum_j f(j) K_jj exact. Every determinant is computed
in log space from a Cholesky factor, never as a raw determinant.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import (
    ConfigurationError,
    InvalidSimilarityError,
    NumericError,
    TrainingDivergedError,
)
from .features import validate_similarity

logger = logging.getLogger(__name__)

JITTER = 1e-10


@dataclass(frozen=True)
class QualityModel:
    theta: np.ndarray
    d_embed: int
    d_surface: int

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 1:
            raise ConfigurationError(f"theta must be a vector, got shape {theta.shape}")
        if self.d_embed < 0 or self.d_surface < 0:
            raise ConfigurationError("feature widths must be nonnegative")
        if len(theta) != self.d_embed + self.d_surface:
            raise ConfigurationError(
                f"theta has {len(theta)} entries, expected "
                f"{self.d_embed} + {self.d_surface}"
            )
        if not np.all(np.isfinite(theta)):
            raise ConfigurationError("theta entries must be finite")
        object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return self.d_embed + self.d_surface

    @classmethod
    def zeros(cls, d_embed: int, d_surface: int) -> "QualityModel":
        return cls(np.zeros(d_embed + d_surface), d_embed, d_surface)


@dataclass(frozen=True)
class LEnsemble:
    matrix: np.ndarray
    n: int


@dataclass(frozen=True)
class MarginalKernel:
    matrix: np.ndarray


@dataclass(frozen=True)
class TrainingInstance:
    features: np.ndarray  # N x D
    similarity: np.ndarray  # N x N
    gold: tuple[int, ...]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        similarity = np.asarray(self.similarity, dtype=float)
        if features.ndim != 2:
            raise ConfigurationError("features must be a 2-d matrix")
        n = features.shape[0]
        if similarity.shape != (n, n):
            raise ConfigurationError(
                f"similarity shape {similarity.shape} does not match {n} sentences"
            )
        gold = tuple(int(i) for i in self.gold)
        if not gold:
            raise ConfigurationError("gold index set is empty")
        if len(set(gold)) != len(gold):
            raise ConfigurationError("gold indices contain duplicates")
        if any(i < 0 or i >= n for i in gold):
            raise ConfigurationError(f"gold index out of range for {n} sentences")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "similarity", similarity)
        object.__setattr__(self, "gold", tuple(sorted(gold)))


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    epochs: int = 100


@dataclass(frozen=True)
class TrainResult:
    model: QualityModel
    trace: list[float]  # log-likelihood at init, then after every epoch


def quality_scores(model: QualityModel, features: np.ndarray) -> np.ndarray:
    """q_i = exp(theta . f(i) / 2), strictly positive and finite."""
    f = np.asarray(features, dtype=float)
    if f.ndim != 2 or f.shape[1] != model.dim:
        raise ConfigurationError(
            f"feature width {f.shape[1] if f.ndim == 2 else '?'} does not match "
            f"model dimension {model.dim}"
        )
    with np.errstate(over="ignore"):
        q = np.exp(0.5 * (f @ model.theta))
    bad = np.flatnonzero(~np.isfinite(q) | (q <= 0.0))
    if bad.size:
        raise NumericError(f"quality score out of range at sentence {bad[0]}")
    return q


def _check_quality(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or not np.all(np.isfinite(q)) or np.any(q <= 0.0):
        raise ConfigurationError("quality scores must be a positive finite vector")
    return q


def build_l_ensemble(q: np.ndarray, s: np.ndarray) -> LEnsemble:
    """L_ij = q_i * S_ij * q_j; S must already be a valid PSD similarity."""
    q = _check_quality(q)
    s = validate_similarity(s)
    n = len(q)
    if s.shape[0] != n:
        raise ConfigurationError(f"similarity is {s.shape[0]}x{s.shape[0]}, q has {n} entries")
    if n:
        min_eig = float(np.linalg.eigvalsh(s)[0])
        if min_eig < -1e-8:
            raise InvalidSimilarityError(
                f"similarity is not PSD (min eigenvalue {min_eig:.3g}); repair it first"
            )
    mat = q[:, None] * s * q[None, :]
    mat = (mat + mat.T) / 2.0
    return LEnsemble(mat, n)


def _cholesky_or_none(a: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def _spd_cholesky(a: np.ndarray, what: str) -> np.ndarray:
    """Factor a matrix that is SPD by construction; one jitter retry, then fail."""
    c = _cholesky_or_none(a)
    if c is None:
        c = _cholesky_or_none(a + JITTER * np.eye(a.shape[0]))
    if c is None:
        raise NumericError(f"{what}: Cholesky failed even after jitter")
    return c


def _equilibrated(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (d, M) with L + I = D M D, D = diag(d), d_i = max(1, sqrt(L_ii)).

    M has entries bounded by 2, so its factorization never overflows even
    when quality scores reach exp(20).
    """
    d = np.sqrt(np.maximum(1.0, np.diagonal(a)))
    m = a / np.outer(d, d) + np.diag(1.0 / d**2)
    return d, m


def log_normalizer(ensemble: LEnsemble) -> float:
    """log det(L + I), the log partition function of the DPP."""
    if ensemble.n == 0:
        return 0.0
    d, m = _equilibrated(ensemble.matrix)
    c = _spd_cholesky(m, "log_normalizer")
    return float(2.0 * np.log(d).sum() + 2.0 * np.log(np.diagonal(c)).sum())


def log_prob(subset: Iterable[int], ensemble: LEnsemble) -> float:
    """log P(Y) = log det(L_Y) - log det(L + I); -inf when L_Y is singular."""
    idx = sorted(set(int(i) for i in subset))
    if idx and (idx[0] < 0 or idx[-1] >= ensemble.n):
        raise IndexError(f"subset index out of range for ground set of {ensemble.n}")
    if not idx:
        numerator = 0.0
    else:
        c = _cholesky_or_none(ensemble.matrix[np.ix_(idx, idx)])
        if c is None:
            return float("-inf")
        numerator = 2.0 * float(np.log(np.diagonal(c)).sum())
    return min(numerator - log_normalizer(ensemble), 0.0)


def marginal_kernel(ensemble: LEnsemble) -> MarginalKernel:
    """K = L(L+I)^{-1}, computed as I - (L+I)^{-1} through the equilibrated form."""
    n = ensemble.n
    if n == 0:
        return MarginalKernel(np.zeros((0, 0)))
    d, m = _equilibrated(ensemble.matrix)
    c = _spd_cholesky(m, "marginal_kernel")
    inv = cho_solve((c, True), np.eye(n))
    k = np.eye(n) - inv / np.outer(d, d)
    k = (k + k.T) / 2.0
    np.fill_diagonal(k, np.clip(np.diagonal(k), 0.0, 1.0))
    return MarginalKernel(k)


def log_likelihood(model: QualityModel, batch: Sequence[TrainingInstance]) -> float:
    total = 0.0
    for m_idx, inst in enumerate(batch):
        value = log_prob(
            inst.gold, build_l_ensemble(quality_scores(model, inst.features), inst.similarity)
        )
        if value == float("-inf"):
            logger.warning("instance %d: gold set has zero probability", m_idx)
        total += value
    return float(total)


def gradient(model: QualityModel, batch: Sequence[TrainingInstance]) -> np.ndarray:
    """d log-likelihood / d theta = sum_m [sum_{i in gold} f(i) - sum_j f(j) K_jj]."""
    grad = np.zeros(model.dim)
    for inst in batch:
        ensemble = build_l_ensemble(quality_scores(model, inst.features), inst.similarity)
        k_diag = np.diagonal(marginal_kernel(ensemble).matrix)
        f = inst.features
        grad += f[list(inst.gold)].sum(axis=0) - f.T @ k_diag
    return grad


def _droppable(inst: TrainingInstance) -> bool:
    """Gold sets with singular similarity submatrix have probability zero at
    every theta (det L_gold = prod q^2 * det S_gold), so the instance can
    never inform training."""
    sub = inst.similarity[np.ix_(list(inst.gold), list(inst.gold))]
    if _cholesky_or_none(sub) is not None:
        return False
    jittered = _cholesky_or_none(sub + JITTER * np.eye(len(sub)))
    if jittered is None:
        logger.warning("gold similarity submatrix singular even after jitter")
    return True


def train(
    init: QualityModel, data: Sequence[TrainingInstance], config: TrainConfig = TrainConfig()
) -> TrainResult:
    """Full-batch gradient ascent from init; trace records epochs+1 values."""
    if not data:
        raise ConfigurationError("training data is empty")
    if config.lr <= 0:
        raise ConfigurationError(f"learning rate must be positive, got {config.lr}")
    if config.epochs < 0:
        raise ConfigurationError(f"epoch count must be nonnegative, got {config.epochs}")
    usable = []
    for m_idx, inst in enumerate(data):
        if _droppable(inst):
            logger.warning("dropping instance %d: gold set has zero probability", m_idx)
        else:
            usable.append(inst)
    if not usable:
        raise ConfigurationError("every training instance had a degenerate gold set")

    model = init
    value = log_likelihood(model, usable)
    if not math.isfinite(value):
        raise TrainingDivergedError(0, "non-finite log-likelihood at initialization")
    trace = [value]
    for epoch in range(1, config.epochs + 1):
        try:
            grad = gradient(model, usable)
            if not np.all(np.isfinite(grad)):
                raise TrainingDivergedError(epoch, "non-finite gradient")
            model = QualityModel(
                model.theta + config.lr * grad, init.d_embed, init.d_surface
            )
            value = log_likelihood(model, usable)
        except TrainingDivergedError:
            raise
        except (NumericError, ConfigurationError) as exc:
            # overflowing quality scores or non-finite theta both mean the
            # ascent left the numerically representable region
            raise TrainingDivergedError(epoch, str(exc)) from exc
        if not math.isfinite(value):
            raise TrainingDivergedError(epoch, "non-finite log-likelihood")
        if value < trace[-1]:
            logger.warning(
                "log-likelihood decreased at epoch %d (%.6f -> %.6f); lower the learning rate",
                epoch,
                trace[-1],
                value,
            )
        trace.append(value)
    return TrainResult(model, trace)


def map_greedy(
    q: np.ndarray,
    s: np.ndarray,
    word_counts: Sequence[int],
    budget_words: int,
) -> list[int]:
    """Greedy log det(L_Y) maximization under a word budget.

    Each step adds the in-budget sentence with the largest positive log-det
    gain (ties to the lowest index) and stops when none remains. When not a
    single sentence fits the budget, the best positive-gain sentence is
    returned alone; otherwise the budget is respected exactly.
    """
    q = _check_quality(q)
    n = len(q)
    counts = [int(w) for w in word_counts]
    if len(counts) != n or any(w < 1 for w in counts):
        raise ConfigurationError("word_counts must hold one positive int per sentence")
    if budget_words < 1:
        raise ConfigurationError(f"budget_words must be positive, got {budget_words}")
    if n == 0:
        return []
    s = np.asarray(s, dtype=float)
    if s.shape != (n, n):
        raise ConfigurationError(f"similarity shape {s.shape} does not match {n} sentences")
    mat = q[:, None] * s * q[None, :]
    mat = (mat + mat.T) / 2.0

    selected: list[int] = []
    chol: np.ndarray | None = None  # lower factor of mat[selected][:, selected]
    used = 0
    while True:
        remaining = budget_words - used
        best_i = -1
        best_schur = 1.0  # schur complement must exceed 1 for positive log gain
        for i in range(n):
            if i in selected or counts[i] > remaining:
                continue
            if chol is None:
                schur = mat[i, i]
            else:
                w = solve_triangular(chol, mat[selected, i], lower=True)
                schur = mat[i, i] - float(w @ w)
            if schur > best_schur:
                best_i = i
                best_schur = schur
        if best_i < 0:
            if not selected and min(counts) > budget_words:
                diag = np.diagonal(mat)
                over = [i for i in range(n) if diag[i] > 1.0]
                if over:
                    return [max(over, key=lambda i: diag[i])]  # max keeps first tie
            return selected
        if chol is None:
            chol = np.array([[math.sqrt(best_schur)]])
        else:
            k = chol.shape[0]
            w = solve_triangular(chol, mat[selected, best_i], lower=True)
            grown = np.zeros((k + 1, k + 1))
            grown[:k, :k] = chol
            grown[k, :k] = w
            grown[k, k] = math.sqrt(best_schur)
            chol = grown
        selected.append(best_i)
        used += counts[best_i]


@dataclass(frozen=True)
class ModelBundle:
    """A trained model plus everything needed to reproduce its features."""

    model: QualityModel
    surface_mean: np.ndarray
    surface_std: np.ndarray
    alpha: float

    def __post_init__(self):
        mean = np.asarray(self.surface_mean, dtype=float)
        std = np.asarray(self.surface_std, dtype=float)
        if mean.shape != (self.model.d_surface,) or std.shape != (self.model.d_surface,):
            raise ConfigurationError(
                "surface statistics must have one entry per surface dimension"
            )
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must be in [0, 1], got {self.alpha}")
        object.__setattr__(self, "surface_mean", mean)
        object.__setattr__(self, "surface_std", std)

    @property
    def feature_mode(self) -> str:
        if self.model.d_embed and self.model.d_surface:
            return "combined"
        return "embeddings" if self.model.d_embed else "surface"


def save_model(path: str | Path, bundle: ModelBundle) -> None:
    payload = {
        "d_embed": bundle.model.d_embed,
        "d_surface": bundle.model.d_surface,
        "theta": [float(x) for x in bundle.model.theta],
        "surface_mean": [float(x) for x in bundle.surface_mean],
        "surface_std": [float(x) for x in bundle.surface_std],
        "alpha": float(bundle.alpha),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_model(path: str | Path) -> ModelBundle:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"model file {path} is not valid JSON: {exc}") from exc
    try:
        model = QualityModel(
            np.asarray(payload["theta"], dtype=float),
            int(payload["d_embed"]),
            int(payload["d_surface"]),
        )
        return ModelBundle(
            model,
            np.asarray(payload["surface_mean"], dtype=float),
            np.asarray(payload["surface_std"], dtype=float),
            float(payload["alpha"]),
        )
    except KeyError as exc:
        raise ConfigurationError(f"model file {path} is missing key {exc}") from exc
