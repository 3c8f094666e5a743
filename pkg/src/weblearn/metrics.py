"""Retrieval metrics: average precision, precision-at-k, mAP, and ranked
scoring of a test set.

The AP denominator is the total number of relevant items in the full test
set (TRECVID convention), and ranking ties are broken by ascending sample
id so metric values are reproducible across platforms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from weblearn.data import Dataset
from weblearn.errors import DataError
from weblearn.learners import LinearModel, decision_score


@dataclass(frozen=True)
class RankedResult:
    """Scored test samples in rank order (scores non-increasing, ties by
    ascending id)."""

    ids: tuple[str, ...]
    scores: tuple[float, ...]
    relevance: tuple[int, ...]
    total_relevant: int


def average_precision(relevance_bits, total_relevant: int) -> float:
    """Sum of precision-at-hit over relevant ranks, divided by the total
    number of relevant items; 0 when nothing is relevant."""
    if total_relevant < 0:
        raise DataError("total_relevant must be >= 0")
    hits = 0
    acc = 0.0
    for rank, bit in enumerate(relevance_bits, start=1):
        if bit:
            hits += 1
            acc += hits / rank
    if hits > total_relevant:
        raise DataError(f"{hits} relevant bits exceed total_relevant={total_relevant}")
    if total_relevant == 0:
        return 0.0
    return acc / total_relevant


def precision_at_k(relevance_bits, k: int) -> float:
    """Fraction of relevant items in the top k; short lists count the
    missing tail as irrelevant."""
    if k <= 0:
        raise DataError(f"k must be >= 1, got {k}")
    top = list(relevance_bits)[:k]
    return sum(1 for b in top if b) / k


def mean_ap(aps) -> float:
    aps = list(aps)
    if not aps:
        raise DataError("cannot average an empty AP list")
    return float(sum(aps) / len(aps))


def rank_and_score(model: LinearModel, dataset: Dataset, concept: str) -> RankedResult:
    """Score all samples, sort by descending score (ties by ascending
    id), and mark relevance from gold labels."""
    X = dataset.feature_matrix()
    scores = decision_score(model, X)
    ids = dataset.ids
    order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
    relevance = tuple(
        int(dataset.samples[i].gold_concepts is not None and concept in dataset.samples[i].gold_concepts)
        for i in order
    )
    total_relevant = sum(
        1
        for s in dataset.samples
        if s.gold_concepts is not None and concept in s.gold_concepts
    )
    return RankedResult(
        ids=tuple(ids[i] for i in order),
        scores=tuple(float(scores[i]) for i in order),
        relevance=relevance,
        total_relevant=total_relevant,
    )


def evaluate_concept(model: LinearModel, dataset: Dataset, concept: str) -> dict:
    ranked = rank_and_score(model, dataset, concept)
    return {
        "concept": concept,
        "ap": average_precision(ranked.relevance, ranked.total_relevant),
        "p_at_5": precision_at_k(ranked.relevance, 5),
        "p_at_10": precision_at_k(ranked.relevance, 10),
    }


def write_metrics_csv(rows: list[dict], path: str) -> None:
    """Fixed-order CSV (concept, ap, p_at_5, p_at_10) plus a MEAN row."""
    if not rows:
        raise DataError("no metric rows to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["concept", "ap", "p_at_5", "p_at_10"])
        for row in rows:
            writer.writerow([row["concept"], row["ap"], row["p_at_5"], row["p_at_10"]])
        writer.writerow(
            [
                "MEAN",
                mean_ap([r["ap"] for r in rows]),
                mean_ap([r["p_at_5"] for r in rows]),
                mean_ap([r["p_at_10"] for r in rows]),
            ]
        )
