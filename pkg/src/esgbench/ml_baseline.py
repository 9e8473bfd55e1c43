"""Minimal multinomial logistic regression over question-level scores.

One weight row per tier class in the fixed order Weak, Average, Good,
Excellent.  The objective is mean multinomial cross-entropy plus an L2
penalty (lambda/2) * ||W||^2 on the weights only; biases are never
penalized.  Training is deterministic: zero initialization, full-batch
gradient descent with a backtracking (Armijo) halving line search, and
a gradient-norm stopping rule.  No randomness enters anywhere.

Features are standardized with the training fold's mean and standard
deviation (a constant feature gets std 1), and missing cells are imputed
with the training fold's column mean beforehand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baseline import Tier, TIER_ORDER
from .errors import DataError

GRAD_TOL = 1e-6
DEFAULT_MAX_ITER = 2000
DEFAULT_LAMBDA = 1.0
_ARMIJO_C = 1e-4


@dataclass
class FeatureMatrix:
    """Rows of question-level scores with induced tier labels.

    rows identifies each observation as a (country, group) pair; columns
    names the question id behind each feature.  values is float64 with
    nan marking missing cells.  labels align with rows.
    """

    rows: list[tuple[str, str]]
    columns: list[str]
    values: np.ndarray
    labels: list[Tier]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.rows), len(self.columns)):
            raise DataError(
                f"feature matrix shape {self.values.shape} does not match "
                f"{len(self.rows)} rows x {len(self.columns)} columns"
            )
        if len(self.labels) != len(self.rows):
            raise DataError(
                f"{len(self.labels)} labels for {len(self.rows)} rows"
            )


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, values: np.ndarray) -> "Standardizer":
        """Column means/stds from a training fold, nan-aware.

        An all-missing column gets mean 0 and std 1 so it standardizes
        to plain zeros.
        """
        with np.errstate(invalid="ignore"):
            mean = np.nanmean(values, axis=0)
            std = np.nanstd(values, axis=0)
        mean = np.where(np.isnan(mean), 0.0, mean)
        std = np.where(np.isnan(std) | (std == 0.0), 1.0, std)
        return cls(mean=mean, std=std)

    def apply(self, values: np.ndarray) -> np.ndarray:
        filled = np.where(np.isnan(values), self.mean, values)
        return (filled - self.mean) / self.std


@dataclass
class LrModel:
    classes: tuple[Tier, ...]
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    standardizer: Standardizer
    columns: list[str]
    lam: float
    converged: bool
    n_iter: int
    final_grad_norm: float
    flags: tuple[str, ...] = ()


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def nll_gradient(
    weights: np.ndarray,
    bias: np.ndarray,
    x: np.ndarray,
    y_onehot: np.ndarray,
    lam: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Objective value and its gradient at (weights, bias).

    Objective: mean cross-entropy over rows + (lam/2) * ||weights||^2.
    Returns (loss, grad_weights, grad_bias).
    """
    n = x.shape[0]
    logits = x @ weights.T + bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    ce = -float((y_onehot * log_probs).sum()) / n
    loss = ce + 0.5 * lam * float((weights * weights).sum())

    probs = np.exp(log_probs)
    delta = probs - y_onehot
    grad_w = delta.T @ x / n + lam * weights
    grad_b = delta.sum(axis=0) / n
    return loss, grad_w, grad_b


def train(
    features: FeatureMatrix,
    lam: float = DEFAULT_LAMBDA,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = GRAD_TOL,
) -> LrModel:
    """Fit the tier predictor on one training fold.

    Stops when the L2 norm of the full gradient drops below tol; hitting
    max_iter first returns the model with converged=False rather than
    raising, so callers can surface the flag in reports.
    """
    if not features.rows:
        raise DataError("cannot train on an empty feature matrix")
    if lam < 0:
        raise DataError(f"lambda must be >= 0, got {lam!r}")

    std = Standardizer.fit(features.values)
    x = std.apply(features.values)
    n, d = x.shape
    k = len(TIER_ORDER)

    y_onehot = np.zeros((n, k), dtype=np.float64)
    for i, label in enumerate(features.labels):
        y_onehot[i, int(label)] = 1.0

    flags: list[str] = []
    present = set(int(t) for t in features.labels)
    for tier in TIER_ORDER:
        if int(tier) not in present:
            flags.append(
                f"class '{tier.label}' absent from training fold; "
                "its row trains to prior-only behavior"
            )

    weights = np.zeros((k, d), dtype=np.float64)
    bias = np.zeros(k, dtype=np.float64)
    loss, grad_w, grad_b = nll_gradient(weights, bias, x, y_onehot, lam)
    grad_norm = float(np.sqrt((grad_w * grad_w).sum() + (grad_b * grad_b).sum()))

    converged = grad_norm < tol
    it = 0
    step = 1.0
    while not converged and it < max_iter:
        sq = grad_norm * grad_norm
        t = min(step * 2.0, 1.0)
        while True:
            new_w = weights - t * grad_w
            new_b = bias - t * grad_b
            new_loss, new_gw, new_gb = nll_gradient(new_w, new_b, x, y_onehot, lam)
            if new_loss <= loss - _ARMIJO_C * t * sq or t < 1e-20:
                break
            t *= 0.5
        if t < 1e-20:
            flags.append("line search stalled before the gradient tolerance")
            break
        weights, bias, loss = new_w, new_b, new_loss
        grad_w, grad_b = new_gw, new_gb
        grad_norm = float(np.sqrt((grad_w * grad_w).sum() + (grad_b * grad_b).sum()))
        step = t
        it += 1
        if grad_norm < tol:
            converged = True

    return LrModel(
        classes=TIER_ORDER,
        weights=weights,
        bias=bias,
        standardizer=std,
        columns=list(features.columns),
        lam=lam,
        converged=converged,
        n_iter=it,
        final_grad_norm=grad_norm,
        flags=tuple(flags),
    )


def predict_proba(model: LrModel, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != len(model.columns):
        raise DataError(
            f"prediction input must be (n, {len(model.columns)}), "
            f"got {values.shape}"
        )
    x = model.standardizer.apply(values)
    return _softmax(x @ model.weights.T + model.bias)


def predict(model: LrModel, values: np.ndarray) -> list[Tier]:
    """Most probable tier per row; probability ties break to the lower tier.

    The class axis is ordered Weak..Excellent and argmax takes the first
    maximum, which is exactly the lower-tier rule.
    """
    probs = predict_proba(model, values)
    return [TIER_ORDER[int(i)] for i in probs.argmax(axis=1)]
