import logging
from typing import List, NamedTuple, Sequence

import numpy as np
from sklearn.metrics import accuracy_score, f1_score
from sklearn.model_selection import StratifiedKFold, train_test_split

from app.exceptions import TrainingError
from app.ml.model_trainer import LinearModel
from app.schemas.training import EvalMetrics, MetricSummary

logger = logging.getLogger(__name__)

VALIDATION_SHARE = 0.2


class FoldSplit(NamedTuple):
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def score(y_true: Sequence[str], y_pred: Sequence[str]) -> EvalMetrics:
    """Accuracy plus macro / weighted F1 over the classes present in y_true"""
    if len(y_true) == 0:
        raise TrainingError("cannot evaluate on an empty test set")
    present = sorted(set(y_true))
    return EvalMetrics(
        accuracy=float(accuracy_score(y_true, y_pred)),
        macro_f1=float(f1_score(y_true, y_pred, labels=present, average="macro", zero_division=0)),
        weighted_f1=float(f1_score(y_true, y_pred, labels=present, average="weighted", zero_division=0)),
        support=len(y_true),
    )


def evaluate(model: LinearModel, X: np.ndarray, y: Sequence[str]) -> EvalMetrics:
    return score(list(y), model.predict(X))


def summarize(metrics: Sequence[EvalMetrics]) -> MetricSummary:
    if not metrics:
        raise TrainingError("no metrics to summarize")
    table = np.array([[m.accuracy, m.macro_f1, m.weighted_f1] for m in metrics])
    mean = table.mean(axis=0)
    std = table.std(axis=0)
    return MetricSummary(
        accuracy_mean=float(mean[0]), accuracy_std=float(std[0]),
        macro_f1_mean=float(mean[1]), macro_f1_std=float(std[1]),
        weighted_f1_mean=float(mean[2]), weighted_f1_std=float(std[2]),
        runs=len(metrics),
    )


def stratified_folds(labels: Sequence[str], k: int = 3, seed: int = 0) -> List[FoldSplit]:
    """k stratified test folds; the rest of each fold splits 80/20 into train and validation.

    Classes with fewer than k members never enter a test fold and always sit in train.
    """
    if k < 2:
        raise TrainingError(f"need at least 2 folds, got {k}")
    y = np.asarray(list(labels))
    classes, counts = np.unique(y, return_counts=True)
    rare = set(classes[counts < k].tolist())
    if rare:
        logger.warning(f"⚠️ Classes with fewer than {k} samples kept in train only: {sorted(rare)}")
    rare_idx = np.flatnonzero(np.isin(y, list(rare))) if rare else np.array([], dtype=np.int64)
    eligible = np.flatnonzero(~np.isin(y, list(rare))) if rare else np.arange(len(y))
    if len(eligible) < k:
        raise TrainingError(f"only {len(eligible)} sample(s) can enter {k} test folds")

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    folds: List[FoldSplit] = []
    for rest, test in splitter.split(np.zeros(len(eligible)), y[eligible]):
        rest_idx = eligible[rest]
        rest_labels = y[rest_idx]
        _, rest_counts = np.unique(rest_labels, return_counts=True)
        stratify = rest_labels if rest_counts.min() >= 2 else None
        if len(rest_idx) >= 2:
            try:
                train_idx, val_idx = train_test_split(
                    rest_idx, test_size=VALIDATION_SHARE, random_state=seed, stratify=stratify
                )
            except ValueError:
                # More classes than validation slots
                train_idx, val_idx = train_test_split(rest_idx, test_size=VALIDATION_SHARE, random_state=seed)
        else:
            train_idx, val_idx = rest_idx, np.array([], dtype=np.int64)
        folds.append(
            FoldSplit(
                train=np.sort(np.concatenate([train_idx, rare_idx]).astype(np.int64)),
                val=np.sort(np.asarray(val_idx, dtype=np.int64)),
                test=np.sort(eligible[test]),
            )
        )
    return folds
