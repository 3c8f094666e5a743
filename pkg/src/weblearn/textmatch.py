"""Token bags and the matching strategies that score samples against
concept words.

A *bag* is a mapping token -> non-negative weight.  Text/ASR/OCR bags use
integer counts; the image modality produces fractional weights (classifier
scores).  All match scores are >= 0 and normalize by total bag weight, so
an empty bag always scores 0.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Mapping

from weblearn.errors import DataError
from weblearn.stemming import stem

__all__ = [
    "tokenize",
    "stem",
    "bag_from_tokens",
    "match_score_exact",
    "match_score_embedding",
    "match_score_lt_we",
    "fuse_modalities",
]

_TOKEN_RE = re.compile(r"[0-9a-z]+")

Bag = Mapping[str, float]


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens, split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


def bag_from_tokens(tokens: Iterable[str]) -> dict[str, float]:
    return dict(Counter(tokens))


def match_score_exact(bag: Bag, concept_words: list[str], stemmed: bool = False) -> float:
    """Fraction of bag weight whose token equals a concept word, with
    optional Porter stemming applied to both sides."""
    if not concept_words:
        raise DataError("concept word list is empty")
    total = sum(bag.values())
    if total <= 0:
        return 0.0
    if stemmed:
        targets = {stem(w) for w in concept_words}
        hit = sum(c for t, c in bag.items() if stem(t) in targets)
    else:
        targets = set(concept_words)
        hit = sum(c for t, c in bag.items() if t in targets)
    return hit / total


def match_score_embedding(bag: Bag, concept_words: list[str], embeddings, threshold: float) -> float:
    """Weighted mean over bag tokens of the max cosine similarity to any
    concept word.

    Pairs below ``threshold`` contribute 0, as do tokens (or concept
    words) with no embedding; a token missing from the vocabulary falls
    back to its stemmed form before giving up.
    """
    if not 0.0 <= threshold <= 1.0:
        raise DataError(f"embedding threshold {threshold} outside [0, 1]")
    if not concept_words:
        raise DataError("concept word list is empty")
    total = sum(bag.values())
    if total <= 0:
        return 0.0
    concept_vecs = [v for v in (embeddings.lookup(w) for w in concept_words) if v is not None]
    if not concept_vecs:
        return 0.0
    acc = 0.0
    for token, count in bag.items():
        vec = embeddings.lookup(token)
        if vec is None:
            continue
        best = max(float(vec @ cv) for cv in concept_vecs)
        if best >= threshold:
            acc += count * best
    return acc / total


def match_score_lt_we(
    bag: Bag,
    topic_words: list[tuple[str, float]],
    embeddings,
    threshold: float,
    top_n: int,
) -> float:
    """Embedding match of the bag against a topic's ``top_n`` most
    probable words, each contribution weighted by the topic's (renormalized)
    probability of that word."""
    if top_n < 1:
        raise DataError(f"top_n must be >= 1, got {top_n}")
    ranked = sorted(topic_words, key=lambda wp: (-wp[1], wp[0]))[:top_n]
    mass = sum(p for _, p in ranked)
    if mass <= 0:
        return 0.0
    score = 0.0
    for word, prob in ranked:
        score += (prob / mass) * match_score_embedding(bag, [word], embeddings, threshold)
    return score


def fuse_modalities(modality_scores: Mapping[str, float], weights: Mapping[str, float]) -> float:
    """Linear fusion sum(weight_mod * score_mod) over the modalities
    present in ``modality_scores``."""
    fused = 0.0
    for modality, score in modality_scores.items():
        w = weights.get(modality, 0.0)
        if w < 0:
            raise DataError(f"negative weight {w} for modality {modality!r}")
        fused += w * score
    return fused
