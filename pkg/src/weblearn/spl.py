"""Self-paced alternating optimizer with curriculum-region constraints.

The training objective over model parameters w and latent sample weights
v constrained to a box region (upper bounds u, the curriculum) is

    sum_i v_i * loss_i(w) + 0.5 * lambda * sum_i (v_i^2 - 2 v_i),

alternating an off-the-shelf weighted fit (w-step) with a closed-form
clamp (v-step) while the model age lambda grows additively until a fixed
iteration, after which it freezes (early stopping).  A dropout variant
multiplies each unconstrained v-step solution by a Bernoulli(p) + epsilon
mask, randomly suppressing sample updates to resist overfitting noisy
labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from weblearn.curriculum import CurriculumRegion
from weblearn.errors import ConfigError, TrainingError
from weblearn.learners import FitConfig, LinearModel, fit_weighted, per_sample_loss
from weblearn.metrics import average_precision


@dataclass(frozen=True)
class RegularizerSpec:
    kind: str = "linear"  # linear | dropout_linear
    p_pos: float = 0.9
    p_neg: float = 0.5
    epsilon: float = 1e-3
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("linear", "dropout_linear"):
            raise ConfigError(f"unknown regularizer kind {self.kind!r}")
        for name, p in (("p_pos", self.p_pos), ("p_neg", self.p_neg)):
            if not 0.0 < p <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {p}")
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")


@dataclass(frozen=True)
class AgeSchedule:
    lambda0_percentile: float = 50.0
    mu: float | None = None  # None: (p90 of initial losses - lambda0) / stop_iter
    stop_iter: int = 100
    max_iters: int = 120
    obj_tol: float = 1e-4

    def __post_init__(self):
        if not 0.0 < self.lambda0_percentile < 100.0:
            raise ConfigError("lambda0_percentile must lie in (0, 100)")
        if self.mu is not None and self.mu <= 0:
            raise ConfigError("mu must be positive")
        if self.stop_iter > self.max_iters:
            raise ConfigError("stop_iter must be <= max_iters")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


@dataclass
class SplState:
    v: np.ndarray
    lam: float
    iter: int = 0
    objective_history: list[float] = field(default_factory=list)
    selected_count_history: list[int] = field(default_factory=list)


@dataclass
class IterationSnapshot:
    iter: int
    lam: float | None
    objective: float | None
    selected: int
    val_ap: float | None = None

    def to_dict(self) -> dict:
        return {
            "iter": self.iter,
            "lambda": self.lam,
            "objective": self.objective,
            "selected": self.selected,
            "val_ap": self.val_ap,
        }


@dataclass
class TrainReport:
    model: LinearModel
    iterations: list[IterationSnapshot]
    chosen_iteration: int
    seeds: dict
    concept: str | None = None
    mode: str = "well"

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "mode": self.mode,
            "model": self.model.to_dict(),
            "iterations": [s.to_dict() for s in self.iterations],
            "chosen_iteration": self.chosen_iteration,
            "seeds": self.seeds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainReport":
        return cls(
            model=LinearModel.from_dict(d["model"]),
            iterations=[
                IterationSnapshot(
                    iter=s["iter"], lam=s["lambda"], objective=s["objective"],
                    selected=s["selected"], val_ap=s.get("val_ap"),
                )
                for s in d["iterations"]
            ],
            chosen_iteration=d["chosen_iteration"],
            seeds=d.get("seeds", {}),
            concept=d.get("concept"),
            mode=d.get("mode", "well"),
        )


def _check_vstep_inputs(losses: np.ndarray, lam: float) -> np.ndarray:
    losses = np.asarray(losses, dtype=np.float64)
    if np.any(losses < 0) or not np.all(np.isfinite(losses)):
        raise TrainingError("losses must be finite and non-negative")
    if lam <= 0:
        raise TrainingError(f"lambda must be positive, got {lam}")
    return losses


def vstep_linear(losses: np.ndarray, lam: float, region: CurriculumRegion) -> np.ndarray:
    """Exact v-step under the linear regularizer: clamp(1 - loss/lambda)
    into [0, u_i].  Separable convex objective, so the per-coordinate
    clamp of the unconstrained solution is the box minimizer."""
    losses = _check_vstep_inputs(losses, lam)
    if losses.shape != region.upper_bounds.shape:
        raise TrainingError("losses and region size mismatch")
    return np.clip(1.0 - losses / lam, 0.0, region.upper_bounds)


def vstep_dropout(
    losses: np.ndarray,
    lam: float,
    region: CurriculumRegion,
    spec: RegularizerSpec,
    labels: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Dropout v-step: draw r_i ~ Bernoulli(p_pos or p_neg by label) +
    epsilon, then clamp r_i * (1 - loss/lambda) into [0, u_i].  Returns
    (v, r) so a trajectory can be replayed."""
    losses = _check_vstep_inputs(losses, lam)
    labels = np.asarray(labels)
    if losses.shape != region.upper_bounds.shape or labels.shape != losses.shape:
        raise TrainingError("losses/labels/region size mismatch")
    p = np.where(labels > 0, spec.p_pos, spec.p_neg)
    r = (rng.random(losses.shape[0]) < p).astype(np.float64) + spec.epsilon
    v = np.clip(r * (1.0 - losses / lam), 0.0, region.upper_bounds)
    return v, r


def objective(losses: np.ndarray, v: np.ndarray, lam: float) -> float:
    """Weighted loss plus the linear self-paced penalty:
    sum v_i loss_i + 0.5 lambda sum (v_i^2 - 2 v_i)."""
    losses = np.asarray(losses, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if losses.shape != v.shape:
        raise TrainingError(f"losses shape {losses.shape} != v shape {v.shape}")
    return float(v @ losses + 0.5 * lam * np.sum(v * v - 2.0 * v))


def init_lambda(losses: np.ndarray, percentile: float) -> float:
    """Initial model age: the given percentile (linear interpolation) of
    the supplied losses, floored at 1e-8."""
    losses = np.asarray(losses, dtype=np.float64)
    if losses.size == 0:
        raise TrainingError("cannot initialize lambda from an empty loss vector")
    if not 0.0 < percentile < 100.0:
        raise TrainingError(f"percentile must lie in (0, 100), got {percentile}")
    return max(float(np.percentile(losses, percentile)), 1e-8)


def _validation_ap(model: LinearModel, X_val: np.ndarray, relevant: np.ndarray) -> float:
    from weblearn.learners import decision_score

    scores = decision_score(model, X_val)
    order = np.argsort(-scores, kind="stable")
    bits = np.asarray(relevant, dtype=bool)[order]
    return average_precision(bits.tolist(), int(bits.sum()))


def train_well(
    X: np.ndarray,
    labels: np.ndarray,
    region: CurriculumRegion,
    fit_config: FitConfig,
    reg_spec: RegularizerSpec,
    schedule: AgeSchedule,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
    seed: int = 0,
    warm_start: bool = True,
) -> TrainReport:
    """Alternating optimization: weighted fit (w-step), closed-form
    latent-weight update (v-step), additive age growth with freeze at
    ``stop_iter``.

    ``validation`` is an optional (features, relevance) pair with trusted
    relevance bits; when present the reported model is the iteration with
    the best validation AP, otherwise the last iteration.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = X.shape[0]
    u = region.upper_bounds
    if labels.shape != (n,) or u.shape != (n,):
        raise TrainingError("labels/region size does not match feature matrix")
    if not np.any(u > 0):
        raise TrainingError("curriculum region admits no sample (all upper bounds zero)")

    ss = np.random.SeedSequence(seed)
    learner_ss, dropout_ss = ss.spawn(2)
    learner_rng = np.random.default_rng(learner_ss)
    dropout_rng = np.random.default_rng(dropout_ss)

    v = u.copy()
    lam: float | None = None
    mu: float | None = schedule.mu
    model: LinearModel | None = None
    snapshots: list[IterationSnapshot] = []
    best = (-np.inf, None, None)  # (val_ap, iteration, model copy)

    for t in range(1, schedule.max_iters + 1):
        try:
            model = fit_weighted(
                X, labels, v, fit_config,
                init=model if warm_start else None,
                rng=learner_rng,
            )
        except TrainingError as exc:
            raise TrainingError(
                f"w-step failed at iteration {t}: {exc}"
            ) from exc
        losses = per_sample_loss(model, X, labels)
        if not np.all(np.isfinite(losses)):
            raise TrainingError(f"non-finite losses at iteration {t}; aborting")

        if lam is None:
            # The age is calibrated on the scarce inferred-positive side
            # (the confident group); easy true negatives would otherwise
            # drag the percentile to ~0 and admit nothing.
            anchor = losses[labels > 0]
            if anchor.size == 0:
                anchor = losses[region.confident_mask()] if region.confident_mask().any() else losses
            lam = init_lambda(anchor, schedule.lambda0_percentile)
            if mu is None:
                p90 = float(np.percentile(anchor, 90.0))
                mu = max((p90 - lam) / max(schedule.stop_iter, 1), 1e-9 * max(lam, 1.0))

        if reg_spec.kind == "dropout_linear":
            v, _ = vstep_dropout(losses, lam, region, reg_spec, labels, dropout_rng)
        else:
            v = vstep_linear(losses, lam, region)

        obj = objective(losses, v, lam)
        snap = IterationSnapshot(iter=t, lam=lam, objective=obj, selected=int((v > 0).sum()))
        if validation is not None:
            snap.val_ap = _validation_ap(model, validation[0], validation[1])
            if snap.val_ap > best[0]:
                best = (snap.val_ap, t, LinearModel(**{**model.__dict__, "weights": model.weights.copy()}))
        snapshots.append(snap)

        converged = (
            t >= schedule.stop_iter
            and len(snapshots) >= 2
            and snapshots[-2].objective is not None
            and abs(obj - snapshots[-2].objective) <= schedule.obj_tol * max(1.0, abs(snapshots[-2].objective))
        )
        if t < schedule.stop_iter:
            lam += mu
        if converged:
            break

    assert model is not None
    if validation is not None and best[1] is not None:
        chosen, final_model = best[1], best[2]
    else:
        chosen, final_model = snapshots[-1].iter, model
    return TrainReport(
        model=final_model,
        iterations=snapshots,
        chosen_iteration=chosen,
        seeds={"session": seed},
        mode="well",
    )


def train_batch(
    X: np.ndarray,
    labels: np.ndarray,
    fit_config: FitConfig,
    seed: int = 0,
) -> TrainReport:
    """Baseline: one weighted fit with every sample at full weight."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = X.shape[0]
    ss = np.random.SeedSequence(seed)
    learner_ss, _ = ss.spawn(2)
    rng = np.random.default_rng(learner_ss)
    model = fit_weighted(X, labels, np.ones(n), fit_config, rng=rng)
    losses = per_sample_loss(model, X, labels)
    snap = IterationSnapshot(iter=1, lam=None, objective=float(losses.sum()), selected=n)
    return TrainReport(
        model=model,
        iterations=[snap],
        chosen_iteration=1,
        seeds={"session": seed},
        mode="batch",
    )
