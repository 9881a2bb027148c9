from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    epochs: int = Field(default=30, gt=0)
    learning_rate: float = Field(default=1e-4, gt=0)
    weight_decay: float = Field(default=0.0, ge=0)
    batch_size: int = Field(default=32, gt=0)
    seed: int = 0
    optimizer: Literal["sgd", "adam"] = "sgd"
    # Halve the learning rate after this many epochs without validation improvement
    lr_patience: Optional[int] = Field(default=None, gt=0)
    lr_factor: float = Field(default=0.5, gt=0, lt=1)
    early_stop_patience: Optional[int] = Field(default=None, gt=0)
    n_features: int = Field(default=4096, gt=0)


class EvalMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    accuracy: float = Field(..., ge=0, le=1)
    macro_f1: float = Field(..., ge=0, le=1)
    weighted_f1: float = Field(..., ge=0, le=1)
    support: int = 0


class MetricSummary(BaseModel):
    accuracy_mean: float
    accuracy_std: float
    macro_f1_mean: float
    macro_f1_std: float
    weighted_f1_mean: float
    weighted_f1_std: float
    runs: int
