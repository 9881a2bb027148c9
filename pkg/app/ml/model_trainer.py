import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.preprocessing import LabelEncoder

from app.exceptions import TrainingError
from app.schemas.training import TrainConfig

logger = logging.getLogger(__name__)

_ADAM_BETAS = (0.9, 0.999)
_ADAM_EPS = 1e-8


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_gradients(
    weights: np.ndarray, bias: np.ndarray, X: np.ndarray, y: np.ndarray, weight_decay: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Mean softmax cross-entropy + weight_decay * ||W||^2 and its gradients.

    weights is (classes, features), y holds class indices.
    """
    n = X.shape[0]
    probs = softmax(X @ weights.T + bias)
    picked = np.clip(probs[np.arange(n), y], 1e-300, None)
    loss = float(-np.log(picked).mean() + weight_decay * np.sum(weights * weights))
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grad_w = delta.T @ X + 2.0 * weight_decay * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


class LinearModel:
    """Multinomial logistic regression over hashed TDOST features"""

    def __init__(self, labels: Sequence[str], weights: np.ndarray, bias: np.ndarray,
                 config: Optional[TrainConfig] = None):
        self.encoder = LabelEncoder().fit(list(labels))
        self.weights = weights
        self.bias = bias
        self.config = config or TrainConfig()
        self.history: List[float] = []

    @classmethod
    def zeros(cls, labels: Sequence[str], n_features: int, config: Optional[TrainConfig] = None) -> "LinearModel":
        ordered = sorted(set(labels))
        return cls(ordered, np.zeros((len(ordered), n_features)), np.zeros(len(ordered)), config)

    @property
    def labels(self) -> List[str]:
        return [str(label) for label in self.encoder.classes_]

    def encode(self, labels: Sequence[str]) -> np.ndarray:
        unknown = sorted(set(labels) - set(self.labels))
        if unknown:
            raise TrainingError(f"labels outside the model vocabulary: {unknown}")
        return self.encoder.transform(list(labels))

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(X @ self.weights.T + self.bias)

    def predict(self, X: np.ndarray) -> List[str]:
        if X.shape[0] == 0:
            return []
        return [str(label) for label in self.encoder.inverse_transform(self.predict_proba(X).argmax(axis=1))]

    def copy(self) -> "LinearModel":
        clone = LinearModel(self.labels, self.weights.copy(), self.bias.copy(), self.config)
        clone.history = list(self.history)
        return clone

    def to_dict(self) -> Dict[str, Any]:
        return {
            "labels": self.labels,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "config": self.config.model_dump(),
            "seed": self.config.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LinearModel":
        return cls(
            data["labels"],
            np.asarray(data["weights"], dtype=np.float64),
            np.asarray(data["bias"], dtype=np.float64),
            TrainConfig.model_validate(data.get("config", {})),
        )

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f)
        logger.info(f"✅ Model saved to {path}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "LinearModel":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def train(
    X: np.ndarray,
    y: Sequence[str],
    config: Optional[TrainConfig] = None,
    labels: Optional[Sequence[str]] = None,
    init: Optional[LinearModel] = None,
    validation: Optional[Tuple[np.ndarray, Sequence[str]]] = None,
    rng: Optional[np.random.Generator] = None,
) -> LinearModel:
    """Mini-batch gradient descent on softmax cross-entropy.

    `init` continues from an existing model (all parameters updated); `rng` lets a
    caller carry one batch-order stream across several calls.
    """
    config = config or TrainConfig()
    if X.shape[0] == 0:
        raise TrainingError("no training data")
    if X.shape[0] != len(y):
        raise TrainingError(f"{X.shape[0]} feature rows but {len(y)} labels")

    if init is not None:
        model = init.copy()
        model.config = config
    else:
        vocabulary = sorted(set(labels) if labels is not None else set(y))
        if len(vocabulary) < 2:
            raise TrainingError(f"need at least two distinct labels, got {vocabulary}")
        model = LinearModel.zeros(vocabulary, X.shape[1], config)
    if model.weights.shape[1] != X.shape[1]:
        raise TrainingError(f"feature dimension {X.shape[1]} != model dimension {model.weights.shape[1]}")

    targets = model.encode(y)
    val_X, val_y = (validation[0], model.encode(validation[1])) if validation and len(validation[1]) else (None, None)
    rng = rng if rng is not None else np.random.default_rng(config.seed)

    lr = config.learning_rate
    m_w = np.zeros_like(model.weights)
    v_w = np.zeros_like(model.weights)
    m_b = np.zeros_like(model.bias)
    v_b = np.zeros_like(model.bias)
    step = 0
    best_val = np.inf
    stale = 0
    n = X.shape[0]

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grad_w, grad_b = loss_and_gradients(
                model.weights, model.bias, X[batch], targets[batch], config.weight_decay
            )
            step += 1
            if not np.isfinite(loss):
                raise TrainingError(f"loss diverged (epoch {epoch}, step {step}, loss {loss})")
            if config.optimizer == "adam":
                b1, b2 = _ADAM_BETAS
                m_w = b1 * m_w + (1 - b1) * grad_w
                v_w = b2 * v_w + (1 - b2) * grad_w ** 2
                m_b = b1 * m_b + (1 - b1) * grad_b
                v_b = b2 * v_b + (1 - b2) * grad_b ** 2
                correction_1 = 1 - b1 ** step
                correction_2 = 1 - b2 ** step
                model.weights -= lr * (m_w / correction_1) / (np.sqrt(v_w / correction_2) + _ADAM_EPS)
                model.bias -= lr * (m_b / correction_1) / (np.sqrt(v_b / correction_2) + _ADAM_EPS)
            else:
                model.weights -= lr * grad_w
                model.bias -= lr * grad_b

        epoch_loss, _, _ = loss_and_gradients(model.weights, model.bias, X, targets, config.weight_decay)
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"loss diverged at the end of epoch {epoch}")
        model.history.append(epoch_loss)

        if val_X is not None:
            val_loss, _, _ = loss_and_gradients(model.weights, model.bias, val_X, val_y, config.weight_decay)
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                stale = 0
            else:
                stale += 1
                if config.lr_patience and stale % config.lr_patience == 0:
                    lr *= config.lr_factor
                    logger.debug(f"Epoch {epoch}: learning rate reduced to {lr:g}")
                if config.early_stop_patience and stale >= config.early_stop_patience:
                    logger.debug(f"Early stop after epoch {epoch}")
                    break

    logger.debug(f"Trained on {n} sample(s), final loss {model.history[-1]:.6f}")
    return model
