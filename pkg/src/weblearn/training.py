"""Per-concept training assembly: inferred labels, negative sampling,
curriculum regions, and the batch / spl / well mode dispatch.

Concept sessions are independent: each derives its RNG streams from
(base seed, concept id) alone, so results are identical no matter how
many worker processes run them.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from weblearn.curriculum import CurriculumScores, build_region, free_region
from weblearn.data import Dataset, infer_binary_labels
from weblearn.errors import ConfigError, TrainingError
from weblearn.learners import FitConfig
from weblearn.spl import AgeSchedule, RegularizerSpec, TrainReport, train_batch, train_well

MODES = ("batch", "spl", "well")


@dataclass(frozen=True)
class TrainOptions:
    mode: str = "well"
    neg_ratio: float = 20.0
    label_flip_rate: float = 0.0
    warm_start: bool = True
    u_low: float = 0.5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.neg_ratio <= 0:
            raise ConfigError("neg_ratio must be positive")
        if not 0.0 <= self.label_flip_rate < 1.0:
            raise ConfigError("label_flip_rate must lie in [0, 1)")


def concept_seed(base_seed: int, concept: str) -> int:
    """Deterministic per-concept seed, stable across processes and runs."""
    digest = hashlib.sha256(f"{base_seed}:{concept}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def select_training_samples(
    scores: np.ndarray, labels: np.ndarray, neg_ratio: float, rng: np.random.Generator
) -> np.ndarray:
    """Indices used for one concept: every positive plus at most
    ``neg_ratio`` times as many sampled negatives."""
    pos = np.flatnonzero(labels > 0)
    neg = np.flatnonzero(labels < 0)
    if pos.size == 0:
        raise TrainingError("concept has no curriculum positives (all scores zero)")
    max_neg = int(np.ceil(neg_ratio * pos.size))
    if neg.size > max_neg:
        neg = np.sort(rng.choice(neg, size=max_neg, replace=False))
    return np.concatenate([pos, neg])


def train_one_concept(
    view: Dataset,
    curriculum: CurriculumScores,
    concept: str,
    fit_config: FitConfig,
    reg_spec: RegularizerSpec,
    schedule: AgeSchedule,
    options: TrainOptions,
    base_seed: int = 0,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
) -> TrainReport:
    """Train one concept detector on the gold-free view.

    Modes: ``batch`` fits once on every selected sample at full weight;
    ``spl`` self-paces inside the unconstrained box; ``well`` adds the
    curriculum-region bounds.
    """
    if view.has_gold():
        raise TrainingError("training received a dataset with gold labels; use training_view()")
    scores = curriculum.scores_for(concept)
    if len(curriculum.sample_ids) != len(view) or curriculum.sample_ids != view.ids:
        raise TrainingError("curriculum sample ids do not match the dataset")
    labels_full = infer_binary_labels(view, concept, scores)

    seed = concept_seed(base_seed, concept)
    ss = np.random.SeedSequence(seed)
    sampling_ss, noise_ss, session_ss = ss.spawn(3)

    idx = select_training_samples(
        scores, labels_full, options.neg_ratio, np.random.default_rng(sampling_ss)
    )
    X = view.feature_matrix()[idx]
    labels = labels_full[idx].astype(np.float64)
    if options.label_flip_rate > 0:
        flips = np.random.default_rng(noise_ss).random(labels.size) < options.label_flip_rate
        labels = np.where(flips, -labels, labels)

    session_seed = int(session_ss.generate_state(1)[0])
    if options.mode == "batch":
        report = train_batch(X, labels, fit_config, seed=session_seed)
    else:
        if options.mode == "well":
            region = build_region(scores[idx], options.u_low)
        else:
            region = free_region(idx.size)
        report = train_well(
            X, labels, region, fit_config, reg_spec, schedule,
            validation=validation, seed=session_seed, warm_start=options.warm_start,
        )
        report.mode = options.mode
    report.concept = concept
    report.seeds = {"base": base_seed, "concept_seed": seed}
    return report


def _train_worker(args) -> tuple[str, TrainReport | None, str | None]:
    (view, curriculum, concept, fit_config, reg_spec, schedule, options, base_seed, validation) = args
    try:
        report = train_one_concept(
            view, curriculum, concept, fit_config, reg_spec, schedule,
            options, base_seed, validation,
        )
        return concept, report, None
    except TrainingError as exc:
        return concept, None, str(exc)


def train_all_concepts(
    view: Dataset,
    curriculum: CurriculumScores,
    concepts: list[str],
    fit_config: FitConfig,
    reg_spec: RegularizerSpec,
    schedule: AgeSchedule,
    options: TrainOptions,
    base_seed: int = 0,
    validations: dict[str, tuple[np.ndarray, np.ndarray]] | None = None,
    jobs: int = 1,
) -> tuple[dict[str, TrainReport], dict[str, str]]:
    """Train every concept; returns (reports, failures) keyed by concept.

    Output is independent of ``jobs`` because each concept derives its
    own RNG streams and the results are keyed, never interleaved.
    """
    tasks = [
        (
            view, curriculum, concept, fit_config, reg_spec, schedule,
            options, base_seed, (validations or {}).get(concept),
        )
        for concept in concepts
    ]
    results: list[tuple[str, TrainReport | None, str | None]] = []
    if jobs <= 1 or len(tasks) <= 1:
        results = [_train_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_train_worker, tasks))
    reports: dict[str, TrainReport] = {}
    failures: dict[str, str] = {}
    for concept, report, error in results:
        if report is not None:
            reports[concept] = report
        else:
            failures[concept] = error or "unknown failure"
    return reports, failures
