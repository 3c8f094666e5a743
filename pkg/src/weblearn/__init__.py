"""Learning binary concept detectors from noisy web-style metadata.

The package covers the full pipeline: loading webly-labeled datasets,
building multi-modal curricula (token matching, word embeddings, seeded
topic models), training per-concept detectors with self-paced alternating
optimization under curriculum-region constraints, and evaluating the
result with retrieval metrics on synthetic noise/size benchmarks.
"""

from weblearn.data import Dataset, Sample, WebLabel, infer_binary_labels, load_dataset, save_dataset
from weblearn.curriculum import CurriculumRegion, CurriculumScores, MatchConfig, build_curriculum, build_region
from weblearn.learners import FitConfig, LinearModel, decision_score, fit_weighted, per_sample_loss
from weblearn.spl import (
    AgeSchedule,
    RegularizerSpec,
    TrainReport,
    init_lambda,
    objective,
    train_well,
    vstep_dropout,
    vstep_linear,
)
from weblearn.metrics import average_precision, mean_ap, precision_at_k, rank_and_score

__version__ = "0.1.0"

__all__ = [
    "AgeSchedule",
    "CurriculumRegion",
    "CurriculumScores",
    "Dataset",
    "FitConfig",
    "LinearModel",
    "MatchConfig",
    "RegularizerSpec",
    "Sample",
    "TrainReport",
    "WebLabel",
    "average_precision",
    "build_curriculum",
    "build_region",
    "decision_score",
    "fit_weighted",
    "infer_binary_labels",
    "init_lambda",
    "load_dataset",
    "mean_ap",
    "objective",
    "per_sample_loss",
    "precision_at_k",
    "rank_and_score",
    "save_dataset",
    "train_well",
    "vstep_dropout",
    "vstep_linear",
]
