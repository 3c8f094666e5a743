"""Per-concept curriculum scores from noisy metadata, and the box-shaped
curriculum region derived from them.

Matching methods: exact / stem token matching, word-embedding matching,
seeded latent topics, and latent topics matched through embeddings
(optionally fused over the text / ASR / image / OCR modalities with
linear weights).  Samples whose fused score is strictly positive form the
confident group (weight bound 1); all others are capped at ``u_low``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from weblearn.data import Concept, Dataset
from weblearn.embeddings import EmbeddingTable
from weblearn.errors import ConfigError, DataError
from weblearn.stemming import stem
from weblearn.textmatch import (
    bag_from_tokens,
    fuse_modalities,
    match_score_exact,
    match_score_embedding,
    match_score_lt_we,
    tokenize,
)

METHODS = ("exact", "stem", "embedding", "latent_topic", "lt_we", "lt_we_multimodal")
MODALITIES = ("text", "asr", "image", "ocr")


@dataclass(frozen=True)
class MatchConfig:
    method: str = "exact"
    embedding_threshold: float = 0.6
    modality_weights: dict[str, float] = field(
        default_factory=lambda: {"text": 1.0, "asr": 0.5, "image": 0.5, "ocr": 0.05}
    )
    image_label_min: float = 0.1
    normalize_modalities: bool = False
    topic_top_n: int = 10
    u_low: float = 0.5
    lda_corpus: str = "all"  # all | text: which modalities feed the topic model

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not 0.0 <= self.embedding_threshold <= 1.0:
            raise ConfigError("embedding_threshold must lie in [0, 1]")
        weights = self.modality_weights
        if any(not np.isfinite(w) or w < 0 for w in weights.values()):
            raise ConfigError("modality weights must be finite and non-negative")
        if not any(w > 0 for w in weights.values()):
            raise ConfigError("at least one modality weight must be positive")
        if not 0.0 < self.u_low < 1.0:
            raise ConfigError("u_low must lie in (0, 1)")
        if self.lda_corpus not in ("all", "text"):
            raise ConfigError("lda_corpus must be 'all' or 'text'")
        if self.topic_top_n < 1:
            raise ConfigError("topic_top_n must be >= 1")


@dataclass(frozen=True)
class CurriculumRegion:
    """Box region for the latent weights: product of [0, u_i] intervals,
    u_i = 1 on the confident group and u_low elsewhere."""

    upper_bounds: np.ndarray
    groups: tuple[str, ...]

    def __post_init__(self):
        if self.upper_bounds.shape[0] != len(self.groups):
            raise DataError("upper bound / group length mismatch")

    def confident_mask(self) -> np.ndarray:
        return np.array([g == "confident" for g in self.groups])


def build_region(scores: np.ndarray, u_low: float) -> CurriculumRegion:
    """u_i = 1 where score_i > 0 (confident group), else u_low."""
    if not 0.0 < u_low < 1.0:
        raise ConfigError(f"u_low must lie in (0, 1), got {u_low}")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size < 1:
        raise DataError("scores must be a non-empty vector")
    confident = scores > 0.0
    u = np.where(confident, 1.0, u_low)
    groups = tuple("confident" if c else "other" for c in confident)
    return CurriculumRegion(upper_bounds=u, groups=groups)


def free_region(n: int) -> CurriculumRegion:
    """The unconstrained box [0, 1]^n (plain self-paced learning)."""
    return CurriculumRegion(upper_bounds=np.ones(n), groups=("confident",) * n)


@dataclass
class CurriculumScores:
    """Fused score and per-modality raw scores for every (sample, concept)."""

    sample_ids: list[str]
    concept_ids: list[str]
    fused: np.ndarray  # (n, C)
    modality_scores: dict[str, np.ndarray]  # modality -> (n, C)

    def scores_for(self, concept: str) -> np.ndarray:
        try:
            c = self.concept_ids.index(concept)
        except ValueError:
            raise DataError(f"concept {concept!r} not present in curriculum") from None
        return self.fused[:, c]

    def region_for(self, concept: str, u_low: float) -> CurriculumRegion:
        return build_region(self.scores_for(concept), u_low)


def modality_bags(web_label, image_label_min: float) -> dict[str, dict[str, float]]:
    """Token bags per modality.  Text concatenates title, description and
    tags; image labels at or above ``image_label_min`` become tokens
    weighted by their classifier score."""
    text_tokens = (
        tokenize(web_label.title)
        + tokenize(web_label.description)
        + [t for tag in web_label.tags for t in tokenize(tag)]
    )
    image_bag: dict[str, float] = {}
    for label, score in web_label.image_labels.items():
        if score >= image_label_min:
            for tok in tokenize(label):
                image_bag[tok] = image_bag.get(tok, 0.0) + score
    return {
        "text": bag_from_tokens(text_tokens),
        "asr": bag_from_tokens(tok for t in web_label.asr_tokens for tok in tokenize(t)),
        "ocr": bag_from_tokens(tok for t in web_label.ocr_tokens for tok in tokenize(t)),
        "image": image_bag,
    }


def concept_seed_words(concept: Concept) -> list[str]:
    """Tokenized concept name words plus their stems, deduplicated."""
    words: list[str] = []
    for w in concept.name_words:
        for tok in tokenize(w):
            if tok not in words:
                words.append(tok)
            s = stem(tok)
            if s not in words:
                words.append(s)
    return words


def _lda_documents(all_bags: list[dict[str, dict[str, float]]], which: str) -> list[dict[str, float]]:
    docs = []
    for bags in all_bags:
        if which == "text":
            docs.append(dict(bags["text"]))
        else:
            merged: dict[str, float] = {}
            for modality in MODALITIES:
                for tok, cnt in bags[modality].items():
                    merged[tok] = merged.get(tok, 0.0) + cnt
            docs.append(merged)
    return docs


def build_curriculum(
    dataset: Dataset,
    config: MatchConfig,
    embeddings: EmbeddingTable | None = None,
    lda_config=None,
    seed: int = 0,
) -> CurriculumScores:
    """Score every (sample, concept) pair with the configured method.

    Only ``lt_we_multimodal`` consults the non-text modalities; all other
    methods match textual metadata alone.  Topic-model methods fit one
    seeded topic per concept on the metadata corpus.
    """
    if not dataset.concepts:
        raise DataError("dataset declares no concepts; cannot build a curriculum")
    if config.method in ("embedding", "lt_we", "lt_we_multimodal") and embeddings is None:
        raise ConfigError(f"method {config.method!r} requires an embedding table")

    n, C = len(dataset), len(dataset.concepts)
    all_bags = [modality_bags(s.web_label, config.image_label_min) for s in dataset.samples]
    concept_words = [concept_seed_words(c) for c in dataset.concepts]

    per_modality: dict[str, np.ndarray] = {}
    if config.method in ("exact", "stem", "embedding"):
        scores = np.zeros((n, C))
        for i, bags in enumerate(all_bags):
            for c, words in enumerate(concept_words):
                if config.method == "exact":
                    scores[i, c] = match_score_exact(bags["text"], list(concept_words[c]), stemmed=False)
                elif config.method == "stem":
                    scores[i, c] = match_score_exact(bags["text"], list(concept_words[c]), stemmed=True)
                else:
                    scores[i, c] = match_score_embedding(
                        bags["text"], list(words), embeddings, config.embedding_threshold
                    )
        per_modality["text"] = scores
        fused = scores.copy()
        return CurriculumScores(dataset.ids, dataset.concept_ids(), fused, per_modality)

    # Topic-model methods share one fitted model over the metadata corpus.
    from weblearn.lda import LdaConfig, fit_lda, topic_scores_for_corpus, topic_top_words

    lda_config = lda_config if lda_config is not None else LdaConfig()
    if lda_config.K < C:
        lda_config = lda_config.with_k(C)
    lda_config = lda_config.with_seed(seed if lda_config.rng_seed is None else lda_config.rng_seed)
    docs = _lda_documents(all_bags, config.lda_corpus)
    seeds = {k: list(words) for k, words in enumerate(concept_words)}
    model = fit_lda(docs, lda_config, seeds)

    if config.method == "latent_topic":
        # Topic proportions are strictly positive; relatedness above the
        # uniform level 1/K separates matched from unmatched samples.
        props = topic_scores_for_corpus(model, docs, lda_config)
        scores = np.maximum(0.0, props[:, :C] - 1.0 / lda_config.K)
        per_modality["text" if config.lda_corpus == "text" else "all"] = scores
        return CurriculumScores(dataset.ids, dataset.concept_ids(), scores.copy(), per_modality)

    top_words = [topic_top_words(model, k, config.topic_top_n) for k in range(C)]
    if config.method == "lt_we":
        modalities = ("text",)
    else:
        modalities = MODALITIES
    for modality in modalities:
        sc = np.zeros((n, C))
        for i, bags in enumerate(all_bags):
            bag = bags[modality]
            if not bag:
                continue
            for c in range(C):
                sc[i, c] = match_score_lt_we(
                    bag, top_words[c], embeddings, config.embedding_threshold, config.topic_top_n
                )
        per_modality[modality] = sc

    if config.method == "lt_we":
        fused = per_modality["text"].copy()
    else:
        mods = dict(per_modality)
        if config.normalize_modalities:
            for name, sc in mods.items():
                peak = sc.max()
                if peak > 0:
                    mods[name] = sc / peak
        fused = np.zeros((n, C))
        for i in range(n):
            for c in range(C):
                fused[i, c] = fuse_modalities(
                    {name: mods[name][i, c] for name in modalities}, config.modality_weights
                )
    return CurriculumScores(dataset.ids, dataset.concept_ids(), fused, per_modality)


def save_curriculum(scores: CurriculumScores, path: str) -> None:
    """JSONL rows {"id", "concept", "score", "group", "modality_scores"}."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, sid in enumerate(scores.sample_ids):
            for c, cid in enumerate(scores.concept_ids):
                fused = float(scores.fused[i, c])
                rec = {
                    "id": sid,
                    "concept": cid,
                    "score": fused,
                    "group": "confident" if fused > 0 else "other",
                    "modality_scores": {
                        name: float(sc[i, c]) for name, sc in sorted(scores.modality_scores.items())
                    },
                }
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_curriculum(path: str) -> CurriculumScores:
    by_pair: dict[tuple[str, str], float] = {}
    modality_names: set[str] = set()
    raw_mods: dict[tuple[str, str], dict[str, float]] = {}
    sample_ids: list[str] = []
    concept_ids: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {line_no}: {exc}") from exc
            sid, cid = str(rec["id"]), str(rec["concept"])
            if sid not in sample_ids:
                sample_ids.append(sid)
            if cid not in concept_ids:
                concept_ids.append(cid)
            by_pair[(sid, cid)] = float(rec["score"])
            mods = rec.get("modality_scores", {})
            raw_mods[(sid, cid)] = {str(k): float(x) for k, x in mods.items()}
            modality_names.update(mods.keys())
    if not by_pair:
        raise DataError(f"{path}: empty curriculum file")
    fused = np.zeros((len(sample_ids), len(concept_ids)))
    modality_scores = {m: np.zeros_like(fused) for m in sorted(modality_names)}
    for i, sid in enumerate(sample_ids):
        for c, cid in enumerate(concept_ids):
            key = (sid, cid)
            if key not in by_pair:
                raise DataError(f"{path}: missing score for sample {sid!r}, concept {cid!r}")
            fused[i, c] = by_pair[key]
            for m, val in raw_mods[key].items():
                modality_scores[m][i, c] = val
    return CurriculumScores(sample_ids, concept_ids, fused, modality_scores)
