import copy
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.exceptions import TrainingError
from app.ml.evaluation import evaluate, stratified_folds
from app.ml.features import featurize_many
from app.ml.model_trainer import LinearModel, train
from app.schemas.dataset import TdostVariant, WindowRecord
from app.schemas.training import TrainConfig

logger = logging.getLogger(__name__)

REAL_ONLY = "real_only"
PRETRAIN_FINETUNE = "pretrain_finetune"
METRIC_COLUMNS = ["accuracy", "macro_f1", "weighted_f1"]

Data = Tuple[np.ndarray, List[str]]


def pretrain(
    virtual: Data, config: TrainConfig, vocabulary: Sequence[str]
) -> Tuple[Optional[LinearModel], np.random.Generator]:
    """First stage: a model trained on virtual data (None when there is none) and the
    batch-order stream positioned after it."""
    rng = np.random.default_rng(config.seed)
    X_virtual, y_virtual = virtual
    if not len(y_virtual):
        return None, rng
    model = train(X_virtual, y_virtual, config, labels=vocabulary, rng=rng)
    logger.debug(f"Pretrained on {len(y_virtual)} virtual window(s)")
    return model, rng


def finetune(
    pretrained: Optional[LinearModel],
    rng: np.random.Generator,
    virtual: Data,
    real: Data,
    config: TrainConfig,
    vocabulary: Sequence[str],
    validation: Optional[Data] = None,
    mix: bool = False,
) -> LinearModel:
    X_virtual, y_virtual = virtual
    X_real, y_real = real
    if len(y_real) == 0:
        raise TrainingError("fine-tuning needs real data")
    if mix and len(y_virtual):
        X_stage, y_stage = np.vstack([X_virtual, X_real]), list(y_virtual) + list(y_real)
    else:
        X_stage, y_stage = X_real, list(y_real)
    return train(X_stage, y_stage, config, labels=vocabulary, init=pretrained, validation=validation, rng=rng)


def pretrain_finetune(
    virtual: Data,
    real: Data,
    config: Optional[TrainConfig] = None,
    finetune_config: Optional[TrainConfig] = None,
    labels: Optional[Sequence[str]] = None,
    validation: Optional[Data] = None,
    mix: bool = False,
) -> LinearModel:
    """Train on virtual data, then keep training every parameter on real data.

    Both stages draw batch orders from one seeded stream. With `mix` the second
    stage trains on virtual and real data together.
    """
    config = config or TrainConfig()
    finetune_config = finetune_config or config
    if len(real[1]) == 0:
        raise TrainingError("fine-tuning needs real data")
    vocabulary = sorted(set(labels or ()) | set(virtual[1]) | set(real[1]))
    pretrained, rng = pretrain(virtual, config, vocabulary)
    return finetune(pretrained, rng, virtual, real, finetune_config, vocabulary, validation, mix)


def stratified_subsample(labels: Sequence[str], fraction: float, seed: int = 0) -> np.ndarray:
    """Indices of a class-proportional subset of about fraction * n samples.

    Quotas are floored per class and the remainder goes to the largest fractional
    parts, so rare classes can vanish at small fractions.
    """
    if not 0 < fraction <= 1:
        raise TrainingError(f"fraction must lie in (0, 1], got {fraction}")
    y = np.asarray(list(labels))
    n = len(y)
    if fraction >= 1 or n == 0:
        return np.arange(n)
    target = max(1, int(round(fraction * n)))
    classes, counts = np.unique(y, return_counts=True)
    exact = counts * (target / n)
    quota = np.floor(exact).astype(int)
    remainder = target - quota.sum()
    if remainder > 0:
        order = np.lexsort((classes, -(exact - quota)))
        quota[order[:remainder]] += 1

    rng = np.random.default_rng(seed)
    chosen = []
    for cls, take in zip(classes, quota):
        members = np.flatnonzero(y == cls)
        if take:
            chosen.append(rng.choice(members, size=take, replace=False))
    return np.sort(np.concatenate(chosen)) if chosen else np.array([], dtype=np.int64)


def run_protocol(
    virtual: Sequence[WindowRecord],
    real: Sequence[WindowRecord],
    fractions: Sequence[float] = (0.05, 0.1, 1.0),
    folds: int = 3,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    variant: TdostVariant = TdostVariant.BASIC,
    config: Optional[TrainConfig] = None,
    mix: bool = False,
) -> pd.DataFrame:
    """Real-only versus virtual-pretrained arms over real-data fractions, folds and seeds.

    Returns one row per (arm, fraction, seed, fold).
    """
    config = config or TrainConfig()
    if not real:
        raise TrainingError("no real windows to evaluate on")
    X_real = featurize_many(real, variant, config.n_features)
    y_real = [r.label for r in real]
    X_virtual = featurize_many(virtual, variant, config.n_features)
    y_virtual = [r.label for r in virtual]
    vocabulary = sorted(set(y_real) | set(y_virtual))

    rows: List[Dict[str, object]] = []
    for seed in seeds:
        seeded = config.model_copy(update={"seed": int(seed)})
        pretrained, stream = pretrain((X_virtual, y_virtual), seeded, vocabulary)
        for fold_index, split in enumerate(stratified_folds(y_real, folds, seed)):
            X_test, y_test = X_real[split.test], [y_real[i] for i in split.test]
            y_pool = [y_real[i] for i in split.train]
            val = (X_real[split.val], [y_real[i] for i in split.val]) if len(split.val) else None
            for fraction in fractions:
                subset = split.train[stratified_subsample(y_pool, fraction, seed)]
                X_sub, y_sub = X_real[subset], [y_real[i] for i in subset]

                baseline = train(X_sub, y_sub, seeded, labels=vocabulary, validation=val)
                # each fine-tune resumes the stream exactly where pretraining left it
                transferred = finetune(
                    pretrained, copy.deepcopy(stream), (X_virtual, y_virtual), (X_sub, y_sub),
                    seeded, vocabulary, validation=val, mix=mix,
                )

                for arm, model in ((REAL_ONLY, baseline), (PRETRAIN_FINETUNE, transferred)):
                    metrics = evaluate(model, X_test, y_test)
                    rows.append(
                        {
                            "arm": arm,
                            "fraction": float(fraction),
                            "seed": int(seed),
                            "fold": fold_index,
                            "train_size": len(y_sub),
                            "accuracy": metrics.accuracy,
                            "macro_f1": metrics.macro_f1,
                            "weighted_f1": metrics.weighted_f1,
                        }
                    )
        logger.info(f"Seed {seed}: {len(rows)} result row(s) so far")
    return pd.DataFrame(rows)


def std(values) -> float:
    return float(np.std(values))


def summarize_grid(grid: pd.DataFrame) -> pd.DataFrame:
    """Mean and population standard deviation per (fraction, arm)"""
    if grid.empty:
        return pd.DataFrame()
    summary = grid.groupby(["fraction", "arm"], sort=True)[METRIC_COLUMNS].agg(["mean", std])
    summary.columns = [f"{metric}_{stat}" for metric, stat in summary.columns]
    return summary.reset_index()
