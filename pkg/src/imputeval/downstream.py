"""Logistic regression, classification metrics and prediction pooling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, log_expit
from scipy.stats import rankdata

MAX_ITER_GRID = (50, 100, 150, 200, 250)
L2 = 1e-8
GRAD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray
    bias: float
    n_iter: int


def _check_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be a 1-D 0/1 vector")
    if y.size < 2 or y.min() == y.max():
        raise ValueError("need both classes present")
    return y.astype(float)


def loss_and_grad(params: np.ndarray, x: np.ndarray, y: np.ndarray,
                  l2: float = L2) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy plus ``l2/2 * |w|^2``; ``params = [w..., b]``."""
    w, b = params[:-1], params[-1]
    z = x @ w + b
    # -[y log s(z) + (1-y) log s(-z)]
    loss = -np.mean(y * log_expit(z) + (1 - y) * log_expit(-z)) + 0.5 * l2 * (w @ w)
    r = (expit(z) - y) / y.size
    grad = np.empty_like(params)
    grad[:-1] = x.T @ r + l2 * w
    grad[-1] = r.sum()
    return float(loss), grad


def train_logreg_path(x, y, checkpoints: Sequence[int], step0: float = 1.0,
                      l2: float = L2) -> dict[int, LogRegModel]:
    """Gradient descent from zero with Armijo backtracking, snapshotting the
    model after each iteration count in ``checkpoints``.

    The run is deterministic, so the snapshot at ``k`` is exactly what a
    fresh run with ``max_iter=k`` would return.
    """
    x = np.asarray(x, dtype=float)
    y = _check_labels(y)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ValueError(f"x has shape {x.shape}, labels {y.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if checkpoints and checkpoints[0] < 0:
        raise ValueError("iteration counts must be >= 0")

    params = np.zeros(x.shape[1] + 1)
    loss, grad = loss_and_grad(params, x, y, l2)
    step = step0
    out = {}
    it = 0
    converged = False
    for target in checkpoints:
        while it < target and not converged:
            gnorm2 = float(grad @ grad)
            if np.sqrt(gnorm2) < GRAD_TOL:
                converged = True
                break
            step = min(step * 2.0, 1e6)
            while True:
                trial = params - step * grad
                new_loss, new_grad = loss_and_grad(trial, x, y, l2)
                if new_loss <= loss - 0.5 * step * gnorm2 or step < 1e-16:
                    break
                step *= 0.5
            params, loss, grad = trial, new_loss, new_grad
            it += 1
        out[target] = LogRegModel(params[:-1].copy(), float(params[-1]), it)
    return out


def train_logreg(x, y, max_iter: int = 100, step0: float = 1.0, l2: float = L2) -> LogRegModel:
    return train_logreg_path(x, y, [max_iter], step0, l2)[max_iter]


def predict_proba(model: LogRegModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.weights.size:
        raise ValueError(f"model expects {model.weights.size} features, got shape {x.shape}")
    return expit(x @ model.weights + model.bias)


def auc(scores, labels) -> float:
    """Mann-Whitney AUC with ties counted as half."""
    s = np.asarray(scores, dtype=float)
    y = _check_labels(labels)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = y.size - n_pos
    ranks = rankdata(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


@dataclass(frozen=True)
class EvalMetrics:
    auc: float
    accuracy: float
    brier: float
    precision: Optional[float]  # None when nothing is predicted positive
    sensitivity: float
    specificity: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def classification_metrics(scores, labels, threshold: float = 0.5) -> EvalMetrics:
    s = np.asarray(scores, dtype=float)
    y = _check_labels(labels)
    pred = s >= threshold
    pos = y == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    tn = int(np.sum(~pred & ~pos))
    fn = int(np.sum(~pred & pos))
    return EvalMetrics(
        auc=auc(s, y),
        accuracy=(tp + tn) / y.size,
        brier=float(np.mean((s - y) ** 2)),
        precision=tp / (tp + fp) if tp + fp else None,
        sensitivity=tp / (tp + fn),
        specificity=tn / (tn + fp),
    )


def pool_predictions(prob_vectors: Sequence, rule: str = "mean") -> np.ndarray:
    """Combine per-imputation predictions by averaging (or majority vote)."""
    arrs = [np.asarray(p, dtype=float) for p in prob_vectors]
    if not arrs:
        raise ValueError("nothing to pool")
    if any(a.shape != arrs[0].shape for a in arrs):
        raise ValueError("prediction vectors differ in length")
    if rule == "vote":
        arrs = [(a >= 0.5).astype(float) for a in arrs]
    elif rule != "mean":
        raise ValueError(f"unknown pooling rule {rule!r}")
    # running mean: exact when every input is the same vector
    out = arrs[0].copy()
    for k, a in enumerate(arrs[1:], start=2):
        out += (a - out) / k
    return out


def fold_auc_table(x, y, folds: Sequence, candidates: Sequence[int] = MAX_ITER_GRID,
                   rows=None) -> np.ndarray:
    """Validation AUC for every (fold, candidate); fold ``v`` trains on the
    other rows of ``rows`` (default: all rows)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    rows = np.arange(len(y)) if rows is None else np.asarray(rows)
    table = np.empty((len(folds), len(candidates)))
    for v, val in enumerate(folds):
        fit = np.setdiff1d(rows, val)
        path = train_logreg_path(x[fit], y[fit], candidates)
        for c, k in enumerate(candidates):
            table[v, c] = auc(predict_proba(path[k], x[val]), y[val])
    return table


def pick_candidate(table: np.ndarray, candidates: Sequence[int]) -> int:
    """Candidate with the best mean over folds; ties go to the smallest."""
    means = np.asarray(table).mean(axis=0)
    best = means.max()
    return int(min(c for c, m in zip(candidates, means) if m == best))


def select_max_iter(x, y, folds: Sequence, candidates: Sequence[int] = MAX_ITER_GRID,
                    rows=None) -> int:
    if not len(candidates):
        raise ValueError("no candidates")
    return pick_candidate(fold_auc_table(x, y, folds, candidates, rows), candidates)
