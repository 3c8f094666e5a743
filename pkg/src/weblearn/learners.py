"""Weighted binary linear classifiers used as the model-update step of
the alternating trainer.

``fit_weighted`` minimizes  sum_i v_i * L(y_i, w.x_i + b) + l2 * ||w||^2
by deterministic mini-batch SGD (fixed shuffle per seed), optionally
followed by full-batch backtracking gradient descent down to a gradient
norm (``grad_tol``) for near-exact convex solves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from weblearn import _backend
from weblearn.errors import ConfigError, TrainingError

LOSSES = ("hinge", "squared_hinge", "logistic")


@dataclass(frozen=True)
class FitConfig:
    loss: str = "hinge"
    l2: float = 0.01
    epochs: int = 20
    eta0: float = 0.5
    lr_decay: float = 0.05
    batch_size: int = 64
    polish_iters: int = 100
    grad_tol: float | None = None
    max_refine_iters: int = 20000
    rng_seed: int = 0
    fit_intercept: bool = True
    normalize_features: bool = True

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ConfigError(f"unknown loss {self.loss!r}; expected one of {LOSSES}")
        if self.eta0 <= 0:
            raise ConfigError("eta0 must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.l2 < 0:
            raise ConfigError("l2 must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    loss_kind: str = "hinge"
    l2: float = 0.01
    normalized: bool = False

    def to_dict(self) -> dict:
        return {
            "weights": [float(x) for x in self.weights],
            "bias": float(self.bias),
            "loss_kind": self.loss_kind,
            "l2": float(self.l2),
            "normalized": bool(self.normalized),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(
            weights=np.asarray(d["weights"], dtype=np.float64),
            bias=float(d["bias"]),
            loss_kind=d.get("loss_kind", "hinge"),
            l2=float(d.get("l2", 0.01)),
            normalized=bool(d.get("normalized", False)),
        )


def normalize_rows(X: np.ndarray) -> np.ndarray:
    """Unit L2 rows; zero rows pass through unchanged."""
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return X / np.where(norms == 0.0, 1.0, norms)


def raw_losses(margins: np.ndarray, loss: str) -> np.ndarray:
    if loss == "hinge":
        return np.maximum(0.0, 1.0 - margins)
    if loss == "squared_hinge":
        return np.maximum(0.0, 1.0 - margins) ** 2
    if loss == "logistic":
        return np.logaddexp(0.0, -margins)
    raise ConfigError(f"unknown loss {loss!r}")


def loss_dmargin(margins: np.ndarray, loss: str) -> np.ndarray:
    """dL/dmargin (the margin is y * score)."""
    if loss == "hinge":
        return np.where(margins < 1.0, -1.0, 0.0)
    if loss == "squared_hinge":
        return np.where(margins < 1.0, -2.0 * (1.0 - margins), 0.0)
    if loss == "logistic":
        return -expit(-margins)
    raise ConfigError(f"unknown loss {loss!r}")


def weighted_objective_grad(w, b, X, y, v, loss, l2, fit_intercept=True):
    """Objective sum_i v_i L_i + l2 ||w||^2 and its (w, b) gradient."""
    scores = X @ w + b
    margins = y * scores
    obj = float(v @ raw_losses(margins, loss)) + l2 * float(w @ w)
    coeff = v * y * loss_dmargin(margins, loss)
    gw = X.T @ coeff + 2.0 * l2 * w
    gb = float(coeff.sum()) if fit_intercept else 0.0
    return obj, gw, gb


def _refine(w, b, X, y, v, loss, l2, grad_tol, max_iters, fit_intercept):
    """Full-batch Armijo backtracking descent until the gradient norm
    falls below ``grad_tol`` (or a stall, which for the non-smooth hinge
    means a kink was reached)."""
    step = 1.0
    obj, gw, gb = weighted_objective_grad(w, b, X, y, v, loss, l2, fit_intercept)
    for _ in range(max_iters):
        gnorm_sq = float(gw @ gw) + gb * gb
        if np.sqrt(gnorm_sq) <= grad_tol:
            break
        while True:
            w_new = w - step * gw
            b_new = b - step * gb if fit_intercept else b
            obj_new, gw_new, gb_new = weighted_objective_grad(
                w_new, b_new, X, y, v, loss, l2, fit_intercept
            )
            if obj_new <= obj - 1e-4 * step * gnorm_sq:
                break
            step *= 0.5
            if step < 1e-300:
                return w, b  # cannot make progress at floating-point resolution
        w, b, obj, gw, gb = w_new, b_new, obj_new, gw_new, gb_new
        step = min(step * 2.0, 1e8)
    return w, b


def fit_weighted(
    X: np.ndarray,
    y: np.ndarray,
    v: np.ndarray,
    config: FitConfig,
    init: LinearModel | None = None,
    rng: np.random.Generator | None = None,
) -> LinearModel:
    """Fit a weighted linear model; samples with v_i = 0 contribute
    nothing to the objective or any update."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n, m = X.shape
    if y.shape != (n,) or v.shape != (n,):
        raise TrainingError(f"shape mismatch: X {X.shape}, y {y.shape}, v {v.shape}")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise TrainingError("sample weights must be finite and non-negative")
    if not np.any(v > 0):
        raise TrainingError("all sample weights are zero")

    if config.normalize_features:
        X = normalize_rows(X)

    active_labels = np.unique(y[v > 0])
    if active_labels.size == 1:
        warnings.warn("weighted data is single-class; fitting a bias-only model")
        return LinearModel(
            weights=np.zeros(m),
            bias=float(active_labels[0]),
            loss_kind=config.loss,
            l2=config.l2,
            normalized=config.normalize_features,
        )

    if init is not None:
        w = np.array(init.weights, dtype=np.float64)
        b = np.array([float(init.bias)])
    else:
        w = np.zeros(m, dtype=np.float64)
        b = np.zeros(1, dtype=np.float64)

    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    loss_id = _backend.LOSS_IDS[config.loss]
    reg_coef = 2.0 * config.l2 / n
    t = 0
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        t = _backend.sgd_epoch(
            X, y, v, perm, w, b, t, config.eta0, config.lr_decay,
            config.batch_size, loss_id, reg_coef, config.fit_intercept,
        )

    if config.polish_iters > 0:
        w, b_val = _refine(
            w, float(b[0]), X, y, v, config.loss, config.l2,
            0.0, config.polish_iters, config.fit_intercept,
        )
        b = np.array([b_val])
    if config.grad_tol is not None:
        w, b_val = _refine(
            w, float(b[0]), X, y, v, config.loss, config.l2,
            config.grad_tol, config.max_refine_iters, config.fit_intercept,
        )
        b = np.array([b_val])

    if not (np.all(np.isfinite(w)) and np.isfinite(b[0])):
        raise TrainingError("learner diverged to non-finite parameters")
    return LinearModel(
        weights=w,
        bias=float(b[0]),
        loss_kind=config.loss,
        l2=config.l2,
        normalized=config.normalize_features,
    )


def decision_score(model: LinearModel, x: np.ndarray) -> np.ndarray | float:
    """w.x + bias; accepts a single vector or an (n, m) matrix."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.weights.shape[0]:
        raise TrainingError(
            f"feature dim {X.shape[1]} does not match model dim {model.weights.shape[0]}"
        )
    if model.normalized:
        X = normalize_rows(X)
    scores = X @ model.weights + model.bias
    return float(scores[0]) if single else scores


def per_sample_loss(model: LinearModel, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Element-wise non-negative loss of the model on (X, y)."""
    scores = decision_score(model, np.atleast_2d(X))
    margins = np.asarray(y, dtype=np.float64) * scores
    return raw_losses(margins, model.loss_kind)
