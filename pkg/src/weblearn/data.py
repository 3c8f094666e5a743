"""Dataset schema and loading for webly-labeled samples.

A dataset is a JSONL file, one sample object per line:

    {"id": str, "features": [float, ...],
     "text": {"title": str, "description": str, "tags": [str]},
     "asr": [str], "ocr": [str], "image_labels": {str: float},
     "gt": [str]}                      # optional, evaluation only

Missing modality keys are treated as empty.  ``features`` may be replaced
by ``feature_file`` naming a ``.npy`` file relative to the dataset file.
Concepts (id plus name words) live in a sidecar JSON file because sample
records carry no concept vocabulary; see :func:`load_concepts`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from weblearn.errors import DataError


@dataclass(frozen=True)
class WebLabel:
    """Noisy web metadata attached to one sample.

    Text arrives raw (tokenization is owned by the curriculum builder);
    ASR/OCR arrive pre-split into token lists; image labels are
    classifier scores in [0, 1].
    """

    title: str = ""
    description: str = ""
    tags: tuple[str, ...] = ()
    asr_tokens: tuple[str, ...] = ()
    ocr_tokens: tuple[str, ...] = ()
    image_labels: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for label, score in self.image_labels.items():
            if not (0.0 <= score <= 1.0):
                raise DataError(f"image label {label!r} score {score} outside [0, 1]")


@dataclass(frozen=True)
class Sample:
    id: str
    features: np.ndarray
    web_label: WebLabel = field(default_factory=WebLabel)
    gold_concepts: frozenset[str] | None = None


@dataclass(frozen=True)
class Concept:
    """A target concept: stable id plus the name words used for matching."""

    id: str
    name_words: tuple[str, ...]

    def __post_init__(self):
        if not self.name_words:
            raise DataError(f"concept {self.id!r} has no name words")


@dataclass(frozen=True)
class Dataset:
    samples: tuple[Sample, ...]
    feature_dim: int
    concepts: tuple[Concept, ...] = ()

    def __post_init__(self):
        if not self.samples:
            raise DataError("empty dataset")
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise DataError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)
            if s.features.shape != (self.feature_dim,):
                raise DataError(
                    f"sample {s.id!r} has {s.features.shape[0]} features, expected {self.feature_dim}"
                )
        if self.concepts:
            vocab = {c.id for c in self.concepts}
            for s in self.samples:
                if s.gold_concepts and not s.gold_concepts <= vocab:
                    unknown = sorted(s.gold_concepts - vocab)
                    raise DataError(f"sample {s.id!r} has unknown gold concepts {unknown}")

    def __len__(self):
        return len(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def feature_matrix(self) -> np.ndarray:
        """Dense (n, m) float64 matrix in sample order."""
        return np.stack([s.features for s in self.samples]).astype(np.float64)

    def concept_ids(self) -> list[str]:
        return [c.id for c in self.concepts]

    def training_view(self) -> "Dataset":
        """The same dataset with every gold label stripped.

        Training code receives only this view; gold concepts exist for
        evaluation and must never leak into model fitting.
        """
        stripped = tuple(replace(s, gold_concepts=None) for s in self.samples)
        return Dataset(samples=stripped, feature_dim=self.feature_dim, concepts=self.concepts)

    def has_gold(self) -> bool:
        return any(s.gold_concepts is not None for s in self.samples)


def _parse_web_label(rec: dict) -> WebLabel:
    text = rec.get("text") or {}
    image_labels = rec.get("image_labels") or {}
    return WebLabel(
        title=text.get("title", "") or "",
        description=text.get("description", "") or "",
        tags=tuple(text.get("tags") or ()),
        asr_tokens=tuple(rec.get("asr") or ()),
        ocr_tokens=tuple(rec.get("ocr") or ()),
        image_labels={str(k): float(v) for k, v in image_labels.items()},
    )


def _load_features(rec: dict, base_dir: str, line_no: int) -> np.ndarray:
    if "features" in rec:
        return np.asarray(rec["features"], dtype=np.float64)
    if "feature_file" in rec:
        path = os.path.join(base_dir, rec["feature_file"])
        return np.load(path).astype(np.float64).ravel()
    raise DataError(f"line {line_no}: record has neither 'features' nor 'feature_file'")


def load_dataset(path: str, expected_dim: int | None = None, concepts: tuple[Concept, ...] | None = None) -> Dataset:
    """Load a JSONL dataset; the feature dimension is inferred from the
    first record unless ``expected_dim`` is given.

    If ``concepts`` is None and ``<path minus extension>.concepts.json``
    exists, concepts are loaded from there.
    """
    samples = []
    dim = expected_dim
    base_dir = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {line_no}: {exc}") from exc
            if "id" not in rec:
                raise DataError(f"{path}: line {line_no}: record has no 'id'")
            feats = _load_features(rec, base_dir, line_no)
            if dim is None:
                dim = feats.shape[0]
            gold = rec.get("gt")
            samples.append(
                Sample(
                    id=str(rec["id"]),
                    features=feats,
                    web_label=_parse_web_label(rec),
                    gold_concepts=None if gold is None else frozenset(str(g) for g in gold),
                )
            )
    if not samples:
        raise DataError(f"{path}: empty dataset")
    if concepts is None:
        sidecar = default_concepts_path(path)
        if os.path.exists(sidecar):
            concepts = load_concepts(sidecar)
        else:
            concepts = ()
    return Dataset(samples=tuple(samples), feature_dim=int(dim), concepts=tuple(concepts))


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write the canonical JSONL form (features inline, sorted keys)."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in dataset.samples:
            rec = {
                "id": s.id,
                "features": [float(x) for x in s.features],
                "text": {
                    "title": s.web_label.title,
                    "description": s.web_label.description,
                    "tags": list(s.web_label.tags),
                },
                "asr": list(s.web_label.asr_tokens),
                "ocr": list(s.web_label.ocr_tokens),
                "image_labels": {k: s.web_label.image_labels[k] for k in sorted(s.web_label.image_labels)},
            }
            if s.gold_concepts is not None:
                rec["gt"] = sorted(s.gold_concepts)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    if dataset.concepts:
        save_concepts(dataset.concepts, default_concepts_path(path))


def default_concepts_path(dataset_path: str) -> str:
    root, _ = os.path.splitext(dataset_path)
    return root + ".concepts.json"


def load_concepts(path: str) -> tuple[Concept, ...]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    concepts = []
    for entry in raw:
        words = entry.get("name_words") or entry.get("words")
        if words is None:
            raise DataError(f"{path}: concept entry {entry.get('id')!r} lacks name words")
        concepts.append(Concept(id=str(entry["id"]), name_words=tuple(str(w) for w in words)))
    return tuple(concepts)


def save_concepts(concepts: tuple[Concept, ...], path: str) -> None:
    payload = [{"id": c.id, "name_words": list(c.name_words)} for c in concepts]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def infer_binary_labels(dataset: Dataset, concept: str, scores) -> np.ndarray:
    """Binary labels from curriculum scores: +1 where the score is
    strictly positive, else -1."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (len(dataset),):
        raise DataError(
            f"concept {concept!r}: got {scores.shape[0]} scores for {len(dataset)} samples"
        )
    return np.where(scores > 0.0, 1, -1).astype(np.int8)
