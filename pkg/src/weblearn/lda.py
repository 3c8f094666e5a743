"""Latent Dirichlet Allocation with asymmetric seeded priors, fit by
variational Bayes.

Topics are seeded by boosting the Dirichlet prior of chosen words
(``eta * seed_boost``), which steers topic k toward concept k without
changing the inference algorithm.  Batch mode warm-starts each document's
variational posterior across iterations, so every update is an exact
block coordinate ascent and the evidence lower bound is non-decreasing;
the online mode of Hoffman et al. is available behind ``mode="online"``
for corpora too large for full passes.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln, logsumexp, psi

from weblearn import _backend
from weblearn.errors import ConfigError, DataError

Bag = dict[str, float]


@dataclass(frozen=True)
class LdaConfig:
    K: int = 1
    alpha: float = 0.1
    eta: float = 0.01
    seed_boost: float = 50.0
    vb_iters: int = 100
    doc_iters: int = 50
    tol: float = 1e-4
    rng_seed: int | None = None
    mode: str = "batch"  # batch | online
    batch_size: int = 32
    tau0: float = 1.0
    kappa: float = 0.7
    min_count: int = 2
    max_df: float = 0.5
    init_jitter: float = 0.5

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.alpha <= 0 or self.eta <= 0:
            raise ConfigError("alpha and eta must be positive")
        if self.seed_boost < 1:
            raise ConfigError("seed_boost must be >= 1")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.mode not in ("batch", "online"):
            raise ConfigError("mode must be 'batch' or 'online'")
        if not 0.0 < self.max_df <= 1.0:
            raise ConfigError("max_df must lie in (0, 1]")

    def with_k(self, k: int) -> "LdaConfig":
        return replace(self, K=k)

    def with_seed(self, seed: int) -> "LdaConfig":
        return replace(self, rng_seed=seed)


@dataclass
class LdaModel:
    vocab: tuple[str, ...]
    topic_word_param: np.ndarray  # (K, V) variational Dirichlet parameters, > 0
    alpha: float
    eta_matrix: np.ndarray  # (K, V) asymmetric prior actually used
    seeds: dict[int, list[str]]
    config: LdaConfig
    elbo_history: list[float] = field(default_factory=list)

    @property
    def K(self) -> int:
        return self.topic_word_param.shape[0]

    def vocab_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.vocab)}

    def expected_topic_word(self) -> np.ndarray:
        lam = self.topic_word_param
        return lam / lam.sum(axis=1, keepdims=True)

    def exp_elog_beta(self) -> np.ndarray:
        lam = self.topic_word_param
        return np.exp(psi(lam) - psi(lam.sum(axis=1))[:, None])

    def save(self, path: str) -> None:
        payload = {
            "vocab": list(self.vocab),
            "topic_word_param": self.topic_word_param.tolist(),
            "alpha": self.alpha,
            "eta_matrix": self.eta_matrix.tolist(),
            "seeds": {str(k): v for k, v in self.seeds.items()},
            "config": _config_to_dict(self.config),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "LdaModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(
            vocab=tuple(payload["vocab"]),
            topic_word_param=np.asarray(payload["topic_word_param"], dtype=np.float64),
            alpha=float(payload["alpha"]),
            eta_matrix=np.asarray(payload["eta_matrix"], dtype=np.float64),
            seeds={int(k): list(v) for k, v in payload["seeds"].items()},
            config=LdaConfig(**payload["config"]),
        )


def _config_to_dict(config: LdaConfig) -> dict:
    from dataclasses import asdict

    return asdict(config)


@dataclass
class DocPosterior:
    gamma: np.ndarray  # (K,)
    phi: np.ndarray  # (T, K), one simplex row per distinct in-vocab token
    token_ids: np.ndarray  # (T,) vocab indices aligned with phi rows
    empty: bool = False

    def topic_proportions(self) -> np.ndarray:
        return self.gamma / self.gamma.sum()


def _as_bag(doc) -> Bag:
    if isinstance(doc, dict):
        return {str(t): float(c) for t, c in doc.items() if c > 0}
    bag: Bag = {}
    for tok in doc:
        bag[str(tok)] = bag.get(str(tok), 0.0) + 1.0
    return bag


def _build_vocab(bags: list[Bag], min_count: int, max_df: float) -> tuple[str, ...]:
    total: dict[str, float] = {}
    df: dict[str, int] = {}
    for bag in bags:
        for tok, cnt in bag.items():
            total[tok] = total.get(tok, 0.0) + cnt
            df[tok] = df.get(tok, 0) + 1
    limit = max_df * len(bags)
    kept = [t for t in total if total[t] >= min_count and df[t] <= limit]
    return tuple(sorted(kept))


def _encode(bags: list[Bag], index: dict[str, int]):
    ids, cts, offsets = [], [], [0]
    for bag in bags:
        pairs = sorted((index[t], c) for t, c in bag.items() if t in index)
        ids.extend(i for i, _ in pairs)
        cts.extend(c for _, c in pairs)
        offsets.append(len(ids))
    return (
        np.asarray(ids, dtype=np.int32),
        np.asarray(cts, dtype=np.float64),
        np.asarray(offsets, dtype=np.int64),
    )


def _doc_lengths(cts: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return np.array([cts[offsets[d] : offsets[d + 1]].sum() for d in range(len(offsets) - 1)])


def build_eta_matrix(
    vocab: tuple[str, ...], config: LdaConfig, concept_seeds: dict[int, list[str]] | None
) -> tuple[np.ndarray, dict[int, list[str]]]:
    """Uniform ``eta`` prior with seed words boosted by ``seed_boost``;
    seed words missing from the vocabulary warn and are dropped."""
    V = len(vocab)
    index = {w: i for i, w in enumerate(vocab)}
    eta_matrix = np.full((config.K, V), config.eta, dtype=np.float64)
    effective: dict[int, list[str]] = {}
    if concept_seeds:
        if max(concept_seeds) >= config.K:
            raise ConfigError(
                f"seeded topic index {max(concept_seeds)} out of range for K={config.K}"
            )
        for k, words in concept_seeds.items():
            kept = []
            for w in words:
                if w in index:
                    eta_matrix[k, index[w]] = config.eta * config.seed_boost
                    kept.append(w)
                else:
                    warnings.warn(f"seed word {w!r} for topic {k} not in vocabulary; dropped")
            effective[k] = kept
    return eta_matrix, effective


def elbo(
    model: LdaModel,
    corpus,
    gammas: np.ndarray,
) -> float:
    """Evidence lower bound of the corpus under per-document posteriors
    ``gammas``, with the token-level assignments at their optimum."""
    if len(corpus) == 0:
        raise DataError("cannot evaluate the bound on an empty corpus")
    bags = [_as_bag(d) for d in corpus]
    index = model.vocab_index()
    ids, cts, offsets = _encode(bags, index)
    lam = model.topic_word_param
    alpha = model.alpha
    K = model.K
    elog_beta = psi(lam) - psi(lam.sum(axis=1))[:, None]
    elog_theta = psi(gammas) - psi(gammas.sum(axis=1))[:, None]

    score = 0.0
    for d in range(len(bags)):
        lo, hi = offsets[d], offsets[d + 1]
        if hi > lo:
            temp = elog_theta[d][:, None] + elog_beta[:, ids[lo:hi]]
            score += float(cts[lo:hi] @ logsumexp(temp, axis=0))
    score += float(np.sum((alpha - gammas) * elog_theta))
    score += float(np.sum(gammaln(gammas) - gammaln(alpha)))
    score += float(np.sum(gammaln(K * alpha) - gammaln(gammas.sum(axis=1))))

    eta_m = model.eta_matrix
    score += float(np.sum((eta_m - lam) * elog_beta))
    score += float(np.sum(gammaln(lam) - gammaln(eta_m)))
    score += float(np.sum(gammaln(eta_m.sum(axis=1)) - gammaln(lam.sum(axis=1))))
    return score


def fit_lda(corpus, config: LdaConfig, concept_seeds: dict[int, list[str]] | None = None) -> LdaModel:
    """Fit the topic model; deterministic given ``rng_seed``.

    Batch mode stops when the relative ELBO change falls below ``tol`` or
    after ``vb_iters`` iterations.
    """
    if len(corpus) == 0:
        raise DataError("empty corpus")
    bags = [_as_bag(d) for d in corpus]
    vocab = _build_vocab(bags, config.min_count, config.max_df)
    if not vocab:
        raise DataError("empty vocabulary after pruning")
    index = {w: i for i, w in enumerate(vocab)}
    ids, cts, offsets = _encode(bags, index)
    D, V, K = len(bags), len(vocab), config.K

    eta_matrix, effective_seeds = build_eta_matrix(vocab, config, concept_seeds)
    rng = np.random.default_rng(0 if config.rng_seed is None else config.rng_seed)
    lam = eta_matrix * (1.0 + config.init_jitter * rng.random((K, V)))

    lengths = _doc_lengths(cts, offsets)
    gamma = np.tile(config.alpha, (D, K)) + lengths[:, None] / K

    model = LdaModel(
        vocab=vocab, topic_word_param=lam, alpha=config.alpha,
        eta_matrix=eta_matrix, seeds=effective_seeds, config=config,
    )

    if config.mode == "batch":
        history: list[float] = []
        for _ in range(config.vb_iters):
            exp_elog_beta = model.exp_elog_beta()
            sstats = np.zeros((K, V))
            _backend.lda_e_step(
                ids, cts, offsets, exp_elog_beta, config.alpha,
                gamma, sstats, config.doc_iters, config.tol,
            )
            sstats *= exp_elog_beta
            model.topic_word_param = eta_matrix + sstats
            bound = elbo(model, bags, gamma)
            history.append(bound)
            if len(history) >= 2:
                prev = history[-2]
                if abs(bound - prev) <= config.tol * max(1.0, abs(prev)):
                    break
        model.elbo_history = history
    else:
        updatect = 0
        history = []
        for _ in range(config.vb_iters):
            for start in range(0, D, config.batch_size):
                stop = min(start + config.batch_size, D)
                rho = (config.tau0 + updatect) ** (-config.kappa)
                updatect += 1
                exp_elog_beta = model.exp_elog_beta()
                sstats = np.zeros((K, V))
                gamma[start:stop] = config.alpha + lengths[start:stop, None] / K
                _backend.lda_e_step(
                    ids[offsets[start] : offsets[stop]] , cts[offsets[start] : offsets[stop]],
                    offsets[start : stop + 1] - offsets[start],
                    exp_elog_beta, config.alpha, gamma[start:stop], sstats,
                    config.doc_iters, config.tol,
                )
                sstats *= exp_elog_beta
                lam_hat = eta_matrix + (D / (stop - start)) * sstats
                model.topic_word_param = (1 - rho) * model.topic_word_param + rho * lam_hat
            history.append(elbo(model, bags, gamma))
        model.elbo_history = history
    return model


def infer_doc(model: LdaModel, doc, config: LdaConfig) -> DocPosterior:
    """Variational posterior for one (possibly out-of-vocabulary) document."""
    bag = _as_bag(doc)
    index = model.vocab_index()
    pairs = sorted((index[t], c) for t, c in bag.items() if t in index)
    K = model.K
    if not pairs:
        warnings.warn("document is empty after out-of-vocabulary filtering; returning the prior")
        return DocPosterior(
            gamma=np.full(K, model.alpha),
            phi=np.zeros((0, K)),
            token_ids=np.zeros(0, dtype=np.int32),
            empty=True,
        )
    tok_ids = np.asarray([i for i, _ in pairs], dtype=np.int32)
    tok_cts = np.asarray([c for _, c in pairs], dtype=np.float64)
    offsets = np.asarray([0, len(tok_ids)], dtype=np.int64)
    gamma = (model.alpha + tok_cts.sum() / K) * np.ones((1, K))
    sstats = np.zeros_like(model.topic_word_param)
    exp_elog_beta = model.exp_elog_beta()
    _backend.lda_e_step(
        tok_ids, tok_cts, offsets, exp_elog_beta, model.alpha,
        gamma, sstats, config.doc_iters, config.tol,
    )
    g = gamma[0]
    elog_theta = psi(g) - psi(g.sum())
    log_phi = elog_theta[:, None] + np.log(exp_elog_beta[:, tok_ids])
    log_phi -= logsumexp(log_phi, axis=0, keepdims=True)
    return DocPosterior(gamma=g, phi=np.exp(log_phi).T, token_ids=tok_ids)


def topic_scores_for_corpus(model: LdaModel, corpus, config: LdaConfig) -> np.ndarray:
    """Row d = normalized posterior topic proportions of document d;
    empty documents get the uniform row."""
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for doc in corpus:
            post = infer_doc(model, doc, config)
            rows.append(post.topic_proportions())
    return np.stack(rows)


def topic_top_words(model: LdaModel, k: int, top_n: int) -> list[tuple[str, float]]:
    """The ``top_n`` most probable words of topic k with their expected
    probabilities (ties broken alphabetically)."""
    probs = model.expected_topic_word()[k]
    order = sorted(range(len(model.vocab)), key=lambda i: (-probs[i], model.vocab[i]))[:top_n]
    return [(model.vocab[i], float(probs[i])) for i in order]
