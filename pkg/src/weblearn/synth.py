"""Synthetic noisy-label benchmark: Gaussian concept clusters plus a
controlled-precision curriculum, and the noise / size sweep harness.

The curriculum noise knob fixes the number of true positives per concept
(the recall) and grows the confident group with false positives until the
requested precision is met exactly, so precision varies while recall is
held constant across settings.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from weblearn.curriculum import CurriculumScores
from weblearn.data import Concept, Dataset, Sample, WebLabel
from weblearn.errors import ConfigError, DataError
from weblearn.learners import FitConfig
from weblearn.metrics import evaluate_concept, mean_ap
from weblearn.spl import AgeSchedule, RegularizerSpec
from weblearn.training import TrainOptions, train_all_concepts


@dataclass(frozen=True)
class SynthConfig:
    concepts: int = 10
    n_pos: int = 100
    n_neg: int = 1000
    feature_dim: int = 20
    separation: float = 4.0
    curriculum_precision: float = 0.6
    curriculum_recall: float = 0.48
    label_noise: float = 0.0
    test_n_pos: int = 50
    test_n_neg: int = 500
    val_n_pos: int = 10
    val_n_neg: int = 100
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.curriculum_precision <= 1.0:
            raise ConfigError("curriculum_precision must lie in (0, 1]")
        if not 0.0 < self.curriculum_recall <= 1.0:
            raise ConfigError("curriculum_recall must lie in (0, 1]")
        if min(self.concepts, self.n_pos, self.n_neg, self.feature_dim) < 1:
            raise ConfigError("concepts, n_pos, n_neg and feature_dim must be >= 1")
        if self.separation <= 0:
            raise ConfigError("separation must be positive")
        if not 0.0 <= self.label_noise < 1.0:
            raise ConfigError("label_noise must lie in [0, 1)")


@dataclass
class SynthBundle:
    train: Dataset
    test: Dataset
    validation: Dataset
    curriculum: CurriculumScores
    config: SynthConfig


def _concept_name(c: int) -> str:
    return f"concept{c:02d}"


def _make_samples(rng, means, config: SynthConfig, n_pos: int, n_neg: int, prefix: str):
    samples = []
    C, m = means.shape
    for c in range(C):
        feats = rng.normal(size=(n_pos, m)) + means[c]
        for i in range(n_pos):
            samples.append(
                Sample(
                    id=f"{prefix}p{c:02d}_{i:05d}",
                    features=feats[i],
                    web_label=WebLabel(),
                    gold_concepts=frozenset({_concept_name(c)}),
                )
            )
    feats = rng.normal(size=(n_neg, m))
    for i in range(n_neg):
        samples.append(
            Sample(
                id=f"{prefix}neg_{i:05d}",
                features=feats[i],
                web_label=WebLabel(),
                gold_concepts=frozenset(),
            )
        )
    return samples


def generate(config: SynthConfig) -> SynthBundle:
    """Deterministic synthetic benchmark for one seed.

    Positives of concept c are drawn from N(separation * u_c, I) with a
    random unit direction u_c; negatives from N(0, I).  The confident
    group of concept c contains exactly round(recall * n_pos) true
    positives and enough false positives to realize the requested
    curriculum precision by count.
    """
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 911]))
    m, C = config.feature_dim, config.concepts
    dirs = rng.normal(size=(C, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    means = config.separation * dirs

    train_samples = _make_samples(rng, means, config, config.n_pos, config.n_neg, "")
    test_samples = _make_samples(rng, means, config, config.test_n_pos, config.test_n_neg, "t_")
    val_samples = _make_samples(rng, means, config, config.val_n_pos, config.val_n_neg, "v_")
    concepts = tuple(
        Concept(id=_concept_name(c), name_words=(_concept_name(c),)) for c in range(C)
    )
    train = Dataset(samples=tuple(train_samples), feature_dim=m, concepts=concepts)
    test = Dataset(samples=tuple(test_samples), feature_dim=m, concepts=concepts)
    validation = Dataset(samples=tuple(val_samples), feature_dim=m, concepts=concepts)

    n = len(train)
    fused = np.zeros((n, C))
    tp_target = int(round(config.curriculum_recall * config.n_pos))
    if tp_target < 1:
        raise DataError("curriculum_recall * n_pos is below one true positive")
    for c in range(C):
        group_size = int(round(tp_target / config.curriculum_precision))
        tp_count = int(round(config.curriculum_precision * group_size))
        if tp_count < 1:
            raise DataError(
                f"precision {config.curriculum_precision} with group size {group_size} "
                "admits no true positive"
            )
        gold_pos = np.array(
            [i for i, s in enumerate(train.samples) if _concept_name(c) in (s.gold_concepts or ())]
        )
        others = np.array(
            [i for i, s in enumerate(train.samples) if _concept_name(c) not in (s.gold_concepts or ())]
        )
        fp_count = group_size - tp_count
        if tp_count > gold_pos.size or fp_count > others.size:
            raise DataError(
                f"concept {c}: group of {group_size} exceeds the available pool "
                f"({gold_pos.size} positives / {others.size} others)"
            )
        tp = rng.choice(gold_pos, size=tp_count, replace=False)
        fp = rng.choice(others, size=fp_count, replace=False)
        fused[tp, c] = 1.0
        fused[fp, c] = 1.0
    curriculum = CurriculumScores(
        sample_ids=train.ids,
        concept_ids=[c.id for c in concepts],
        fused=fused,
        modality_scores={"synthetic": fused.copy()},
    )
    return SynthBundle(
        train=train, test=test, validation=validation, curriculum=curriculum, config=config
    )


@dataclass(frozen=True)
class SweepOptions:
    fit: FitConfig = FitConfig(epochs=6, eta0=0.5, lr_decay=0.05, l2=0.01, polish_iters=30)
    schedule: AgeSchedule = AgeSchedule(stop_iter=20, max_iters=30, obj_tol=1e-3)
    regularizer: RegularizerSpec = RegularizerSpec(kind="linear")
    neg_ratio: float = 20.0
    u_low: float = 0.3
    jobs: int = 1
    out_dir: str | None = None


@dataclass
class SweepResult:
    axis_name: str  # "precision" or "size"
    cells: dict[tuple[str, float, int], dict]

    def map_for(self, method: str, axis_value: float, seed: int) -> float | None:
        return self.cells[(method, axis_value, seed)].get("map")

    def mean_map(self, method: str, axis_value: float) -> float:
        vals = [
            cell["map"]
            for (m, a, _), cell in self.cells.items()
            if m == method and a == axis_value and cell.get("map") is not None
        ]
        if not vals:
            raise DataError(f"no successful cells for {method} at {axis_value}")
        return float(np.mean(vals))

    def to_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "axis_value", "seed", "map"])
            for (method, axis, seed) in sorted(self.cells):
                cell = self.cells[(method, axis, seed)]
                value = cell.get("map")
                writer.writerow([method, axis, seed, "" if value is None else value])

    def to_plot_tsv(self, path: str) -> None:
        """Long-format plot data: method, axis, mean and standard error
        over seeds."""
        methods = sorted({m for (m, _, _) in self.cells})
        axes = sorted({a for (_, a, _) in self.cells})
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t")
            writer.writerow(["method", "axis_value", "mean_map", "stderr"])
            for method in methods:
                for axis in axes:
                    vals = [
                        cell["map"]
                        for (m, a, _), cell in self.cells.items()
                        if m == method and a == axis and cell.get("map") is not None
                    ]
                    if not vals:
                        writer.writerow([method, axis, "", ""])
                        continue
                    mean = float(np.mean(vals))
                    stderr = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
                    writer.writerow([method, axis, mean, stderr])


def _cell_path(out_dir: str, axis_name: str, method: str, axis_value: float, seed: int) -> str:
    return os.path.join(out_dir, f"cell_{axis_name}_{method}_{axis_value:g}_{seed}.json")


def run_cell(bundle: SynthBundle, method: str, options: SweepOptions, seed: int) -> dict:
    """Train all concepts of one (dataset, method) cell and evaluate mAP
    on the held-out gold-labeled test split."""
    train_opts = TrainOptions(
        mode=method,
        neg_ratio=options.neg_ratio,
        label_flip_rate=bundle.config.label_noise,
        u_low=options.u_low,
    )
    # The spl baseline is classical self-paced learning: linear
    # regularizer, no curriculum region.  Only the full method uses the
    # configured (possibly dropout) regularizer.
    reg_spec = options.regularizer
    if method == "spl":
        reg_spec = replace(reg_spec, kind="linear")
    view = bundle.train.training_view()
    # Iteration selection is tuned per concept on the small gold-labeled
    # validation split, identically for every method.
    X_val = bundle.validation.feature_matrix()
    validations = {
        c.id: (
            X_val,
            np.array(
                [c.id in (s.gold_concepts or ()) for s in bundle.validation.samples]
            ),
        )
        for c in bundle.train.concepts
    }
    reports, failures = train_all_concepts(
        view, bundle.curriculum, [c.id for c in bundle.train.concepts],
        options.fit, reg_spec, options.schedule, train_opts,
        base_seed=seed, validations=validations, jobs=options.jobs,
    )
    if failures:
        detail = "; ".join(f"{c}: {msg}" for c, msg in sorted(failures.items()))
        return {"map": None, "error": f"training failures: {detail}"}
    rows = [evaluate_concept(reports[c].model, bundle.test, c) for c in sorted(reports)]
    return {
        "map": mean_ap([r["ap"] for r in rows]),
        "per_concept": {r["concept"]: r["ap"] for r in rows},
    }


def _run_sweep(axis_name, axis_values, methods, seeds, make_config, options: SweepOptions) -> SweepResult:
    if options.out_dir:
        os.makedirs(options.out_dir, exist_ok=True)
    cells: dict[tuple[str, float, int], dict] = {}
    for seed in seeds:
        for axis_value in axis_values:
            bundle = None
            for method in methods:
                key = (method, float(axis_value), int(seed))
                if options.out_dir:
                    path = _cell_path(options.out_dir, axis_name, method, axis_value, seed)
                    if os.path.exists(path):
                        with open(path, encoding="utf-8") as fh:
                            cells[key] = json.load(fh)
                        continue
                if bundle is None:
                    bundle = generate(make_config(axis_value, seed))
                try:
                    cell = run_cell(bundle, method, options, seed)
                except Exception as exc:  # record, keep sweeping
                    cell = {"map": None, "error": str(exc)}
                cells[key] = cell
                if options.out_dir:
                    path = _cell_path(options.out_dir, axis_name, method, axis_value, seed)
                    with open(path, "w", encoding="utf-8") as fh:
                        json.dump(cell, fh, sort_keys=True)
                        fh.write("\n")
    return SweepResult(axis_name=axis_name, cells=cells)


def run_noise_sweep(
    p_values, methods, seeds, base: SynthConfig, options: SweepOptions | None = None
) -> SweepResult:
    """Table-3-style protocol: vary curriculum precision at fixed recall."""
    options = options or SweepOptions()

    def make_config(p, seed):
        return replace(base, curriculum_precision=float(p), seed=int(seed))

    return _run_sweep("noise", p_values, methods, seeds, make_config, options)


def run_size_sweep(
    sizes, methods, seeds, base: SynthConfig, options: SweepOptions | None = None
) -> SweepResult:
    """Table-6-style protocol: vary the training-set size (positives per
    concept; negatives scale proportionally) at fixed noise."""
    options = options or SweepOptions()

    def make_config(size, seed):
        n_pos = int(size)
        n_neg = max(1, int(round(base.n_neg * n_pos / base.n_pos)))
        return replace(base, n_pos=n_pos, n_neg=n_neg, seed=int(seed))

    return _run_sweep("size", sizes, methods, seeds, make_config, options)


def save_bundle(bundle: SynthBundle, out_dir: str) -> dict[str, str]:
    """Write train/test datasets, curriculum, and concepts under a
    directory; returns the file map."""
    from weblearn.curriculum import save_curriculum
    from weblearn.data import save_dataset

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "train": os.path.join(out_dir, "train.jsonl"),
        "test": os.path.join(out_dir, "test.jsonl"),
        "curriculum": os.path.join(out_dir, "curriculum.jsonl"),
    }
    save_dataset(bundle.train, paths["train"])
    save_dataset(bundle.test, paths["test"])
    save_curriculum(bundle.curriculum, paths["curriculum"])
    return paths
