"""Command-line front end.

Subcommands: ``curriculum build``, ``train``, ``eval``, ``sweep noise``,
``sweep size``, ``synth generate``, ``config schema``.  Every command is
deterministic given ``--seed``: rerunning writes byte-identical primary
outputs, and ``--jobs`` never changes results (only wall time).

Exit codes: 0 success, 1 partial or data failure, 2 usage error.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys

import click
import numpy as np

import weblearn.config as cfg
from weblearn.curriculum import build_curriculum, load_curriculum, save_curriculum
from weblearn.data import load_concepts, load_dataset
from weblearn.embeddings import load_embeddings
from weblearn.errors import WeblearnError
from weblearn.metrics import evaluate_concept, write_metrics_csv
from weblearn.spl import TrainReport
from weblearn.synth import SweepOptions, generate, run_noise_sweep, run_size_sweep, save_bundle
from weblearn.training import train_all_concepts


def _load_run_config(path: str | None) -> cfg.RunConfig:
    if path is None:
        return cfg.RunConfig()
    return cfg.run_config_from_file(path)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.UsageError(f"expected a comma-separated list of numbers, got {text!r}")


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.UsageError(f"expected a comma-separated list of integers, got {text!r}")


@click.group()
def main():
    """Concept detectors from noisy web labels: curricula, self-paced
    training, evaluation, and synthetic benchmarks."""


# ----------------------------------------------------------------- curriculum


@main.group()
def curriculum():
    """Build per-(sample, concept) curriculum scores."""


@curriculum.command("build")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option(
    "--method",
    type=click.Choice(["exact", "stem", "embedding", "latent_topic", "lt_we", "lt_we_multimodal"]),
    default=None,
    help="Overrides the config's match.method.",
)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True))
@click.option("--concepts", "concepts_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Overrides the config's seed.")
def curriculum_build(dataset_path, method, config_path, embeddings_path, concepts_path, out_path, seed):
    """Score every sample against every concept and write curriculum JSONL."""
    run = _load_run_config(config_path)
    match_config = run.match
    if method is not None:
        match_config = dataclasses.replace(match_config, method=method)
    if seed is None:
        seed = run.seed
    if match_config.method in ("embedding", "lt_we", "lt_we_multimodal") and embeddings_path is None:
        raise click.UsageError(f"--embeddings is required for method {match_config.method!r}")
    try:
        concepts = load_concepts(concepts_path) if concepts_path else None
        dataset = load_dataset(dataset_path, concepts=concepts)
        embeddings = load_embeddings(embeddings_path) if embeddings_path else None
        scores = build_curriculum(
            dataset.training_view(), match_config, embeddings=embeddings,
            lda_config=run.lda, seed=seed,
        )
        save_curriculum(scores, out_path)
    except WeblearnError as exc:
        raise click.ClickException(str(exc))
    click.echo("concept\tconfident_fraction")
    n = len(scores.sample_ids)
    for c, cid in enumerate(scores.concept_ids):
        frac = float((scores.fused[:, c] > 0).sum()) / n
        click.echo(f"{cid}\t{frac:.4f}")


# ---------------------------------------------------------------------- train


@main.command("train")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--curriculum", "curriculum_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["batch", "spl", "well"]), default=None)
@click.option("--regularizer", type=click.Choice(["linear", "dropout"]), default=None)
@click.option("--validation", "validation_path", type=click.Path(exists=True))
@click.option("--validation-curriculum", "validation_curriculum_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
def train_cmd(
    dataset_path, curriculum_path, config_path, mode, regularizer,
    validation_path, validation_curriculum_path, out_dir, seed, jobs,
):
    """Train one detector per concept; writes report_<concept>.json files
    plus a manifest."""
    run = _load_run_config(config_path)
    options = run.train
    if mode is not None:
        options = dataclasses.replace(options, mode=mode)
    reg_spec = run.regularizer
    if regularizer is not None:
        kind = "dropout_linear" if regularizer == "dropout" else "linear"
        reg_spec = dataclasses.replace(reg_spec, kind=kind)
    if seed is None:
        seed = run.seed

    try:
        dataset = load_dataset(dataset_path)
        curriculum_scores = load_curriculum(curriculum_path)
        view = dataset.training_view()
        concepts = [c.id for c in dataset.concepts] or curriculum_scores.concept_ids

        validations = None
        if validation_path:
            val = load_dataset(validation_path)
            X_val = val.feature_matrix()
            validations = {}
            if validation_curriculum_path:
                val_cur = load_curriculum(validation_curriculum_path)
                for concept in concepts:
                    validations[concept] = (X_val, val_cur.scores_for(concept) > 0)
            else:
                if not val.has_gold():
                    raise click.ClickException(
                        "--validation dataset has no gold labels; pass --validation-curriculum "
                        "to validate against noisy labels"
                    )
                for concept in concepts:
                    rel = np.array(
                        [s.gold_concepts is not None and concept in s.gold_concepts for s in val.samples]
                    )
                    validations[concept] = (X_val, rel)

        reports, failures = train_all_concepts(
            view, curriculum_scores, concepts, run.learner, reg_spec, run.schedule,
            options, base_seed=seed, validations=validations, jobs=jobs,
        )
    except WeblearnError as exc:
        raise click.ClickException(str(exc))

    os.makedirs(out_dir, exist_ok=True)
    for concept in sorted(reports):
        path = os.path.join(out_dir, f"report_{concept}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(reports[concept].to_dict(), fh, sort_keys=True)
            fh.write("\n")
    manifest = {
        "trained": sorted(reports),
        "failed": {c: failures[c] for c in sorted(failures)},
        "mode": options.mode,
        "seed": seed,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    click.echo(f"trained {len(reports)}/{len(reports) + len(failures)} concepts -> {out_dir}")
    if failures:
        sys.exit(1)


# ----------------------------------------------------------------------- eval


@main.command("eval")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True),
              help="Gold-labeled test dataset.")
@click.option("--models", "models_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_cmd(dataset_path, models_dir, out_path):
    """Evaluate trained detectors: per-concept AP/P@5/P@10 plus a MEAN row."""
    try:
        dataset = load_dataset(dataset_path)
        if not dataset.has_gold():
            raise click.ClickException("test dataset has no gold labels")
        rows = []
        report_files = sorted(
            f for f in os.listdir(models_dir) if f.startswith("report_") and f.endswith(".json")
        )
        if not report_files:
            raise click.ClickException(f"no report_*.json files under {models_dir}")
        for fname in report_files:
            with open(os.path.join(models_dir, fname), encoding="utf-8") as fh:
                report = TrainReport.from_dict(json.load(fh))
            rows.append(evaluate_concept(report.model, dataset, report.concept))
        rows.sort(key=lambda r: r["concept"])
        write_metrics_csv(rows, out_path)
    except WeblearnError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote metrics for {len(rows)} concepts -> {out_path}")


# ---------------------------------------------------------------------- sweep


@main.group()
def sweep():
    """Synthetic benchmark sweeps (noise robustness, dataset size)."""


def _sweep_options(run: cfg.RunConfig, jobs: int, out_dir: str) -> SweepOptions:
    return SweepOptions(
        fit=run.learner,
        schedule=run.schedule,
        regularizer=run.regularizer,
        neg_ratio=run.train.neg_ratio,
        u_low=run.train.u_low,
        jobs=jobs,
        out_dir=os.path.join(out_dir, "cells"),
    )


def _write_sweep(result, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    result.to_csv(os.path.join(out_dir, "sweep.csv"))
    result.to_plot_tsv(os.path.join(out_dir, "plot.tsv"))


@sweep.command("noise")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--p-values", default="0.2,0.4,0.6,0.8", show_default=True)
@click.option("--methods", default="batch,spl,well", show_default=True)
@click.option("--seeds", default="0,1,2,3,4", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--jobs", type=int, default=1, show_default=True)
def sweep_noise(config_path, p_values, methods, seeds, out_dir, jobs):
    """Vary curriculum precision at fixed recall and compare methods."""
    run = _load_run_config(config_path)
    methods_list = [m.strip() for m in methods.split(",") if m.strip()]
    for m in methods_list:
        if m not in ("batch", "spl", "well"):
            raise click.UsageError(f"unknown method {m!r}")
    try:
        result = run_noise_sweep(
            _parse_floats(p_values), methods_list, _parse_ints(seeds),
            run.synth, _sweep_options(run, jobs, out_dir),
        )
    except WeblearnError as exc:
        raise click.ClickException(str(exc))
    _write_sweep(result, out_dir)
    click.echo(f"wrote {len(result.cells)} cells -> {out_dir}")


@sweep.command("size")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--sizes", default="40,70,100,130", show_default=True,
              help="Positives per concept; negatives scale proportionally.")
@click.option("--methods", default="batch,spl,well", show_default=True)
@click.option("--seeds", default="0,1,2,3,4", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--jobs", type=int, default=1, show_default=True)
def sweep_size(config_path, sizes, methods, seeds, out_dir, jobs):
    """Vary the training-set size at fixed noise and compare methods."""
    run = _load_run_config(config_path)
    methods_list = [m.strip() for m in methods.split(",") if m.strip()]
    for m in methods_list:
        if m not in ("batch", "spl", "well"):
            raise click.UsageError(f"unknown method {m!r}")
    try:
        result = run_size_sweep(
            _parse_ints(sizes), methods_list, _parse_ints(seeds),
            run.synth, _sweep_options(run, jobs, out_dir),
        )
    except WeblearnError as exc:
        raise click.ClickException(str(exc))
    _write_sweep(result, out_dir)
    click.echo(f"wrote {len(result.cells)} cells -> {out_dir}")


# ---------------------------------------------------------------------- synth


@main.group()
def synth():
    """Synthetic benchmark data."""


@synth.command("generate")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
def synth_generate(config_path, out_dir, seed):
    """Generate a train/test dataset pair plus its curriculum."""
    run = _load_run_config(config_path)
    synth_config = run.synth
    if seed is not None:
        synth_config = dataclasses.replace(synth_config, seed=seed)
    try:
        bundle = generate(synth_config)
        paths = save_bundle(bundle, out_dir)
    except WeblearnError as exc:
        raise click.ClickException(str(exc))
    for name in sorted(paths):
        click.echo(f"{name}: {paths[name]}")


# --------------------------------------------------------------------- config


@main.group("config")
def config_group():
    """Configuration helpers."""


@config_group.command("schema")
def config_schema():
    """Print the full default configuration document."""
    click.echo(cfg.schema_json())


if __name__ == "__main__":
    main()
