"""ROUGE-1, ROUGE-2, and ROUGE-SU4 F-scores with stemming and truncation.

Multi-reference scores are the arithmetic mean over references, not
jackknifing, so absolute values are comparable only within this package.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .features import tokenize
from .stem import porter_stem

SKIP_GAP = 4


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalConfig:
    limit_words: int = 100
    stem: bool = True


def _score(overlap: int, n_candidate: int, n_reference: int) -> RougeScore:
    p = overlap / n_candidate if n_candidate else 0.0
    r = overlap / n_reference if n_reference else 0.0
    f = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(p, r, f)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap: each reference n-gram credits at most its own count."""
    cand = _ngram_counts(candidate, n)
    ref = _ngram_counts(reference, n)
    overlap = sum((cand & ref).values())
    return _score(overlap, sum(cand.values()), sum(ref.values()))


def _su4_units(tokens: Sequence[str]) -> Counter:
    # skip-bigrams (at most SKIP_GAP tokens between the two) pooled with
    # unigrams; 1-tuples and 2-tuples cannot collide as Counter keys
    units = Counter((t,) for t in tokens)
    for i in range(len(tokens)):
        for j in range(i + 1, min(i + SKIP_GAP + 2, len(tokens))):
            units[tokens[i], tokens[j]] += 1
    return units


def rouge_su4(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Skip-bigram (gap <= 4) plus unigram overlap, denominators per side."""
    cand = _su4_units(candidate)
    ref = _su4_units(reference)
    overlap = sum((cand & ref).values())
    return _score(overlap, sum(cand.values()), sum(ref.values()))


def _prepare(text: str, stem: bool) -> list[str]:
    tokens = tokenize(text)
    if stem:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def _mean(scores: list[RougeScore]) -> RougeScore:
    k = len(scores)
    return RougeScore(
        sum(s.precision for s in scores) / k,
        sum(s.recall for s in scores) / k,
        sum(s.f1 for s in scores) / k,
    )


def evaluate(
    summary_sentences: Sequence[str],
    references: Sequence[str],
    config: EvalConfig = EvalConfig(),
) -> dict[str, RougeScore]:
    """Score a summary against every reference and average the results.

    The candidate is the sentences joined in selection order, lowercased,
    tokenized, stemmed, and truncated to the first ``limit_words`` tokens.
    References are never truncated.
    """
    if not references:
        raise ValueError("at least one reference is required")
    candidate = _prepare(" ".join(summary_sentences), config.stem)[: config.limit_words]
    per_ref: dict[str, list[RougeScore]] = {"r1": [], "r2": [], "rsu4": []}
    for reference in references:
        ref_tokens = _prepare(reference, config.stem)
        per_ref["r1"].append(rouge_n(candidate, ref_tokens, 1))
        per_ref["r2"].append(rouge_n(candidate, ref_tokens, 2))
        per_ref["rsu4"].append(rouge_su4(candidate, ref_tokens))
    return {key: _mean(scores) for key, scores in per_ref.items()}
