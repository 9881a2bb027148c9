from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from app.schemas.dataset import TdostVariant
from app.schemas.grounding import GroundingThresholds
from app.schemas.sensors import DEFAULT_RADIUS
from app.schemas.sim import SimParams
from app.schemas.training import TrainConfig

SynonymEntry = Union[str, Dict[str, Any]]


class HomeSpec(BaseModel):
    """One layout and the day files simulated in it; `scripts` may name directories"""
    layout: str
    scripts: List[str] = Field(default_factory=list)
    name: Optional[str] = None


class EmbeddingConfig(BaseModel):
    provider: Literal["deterministic", "http"] = "deterministic"
    dimension: int = Field(default=256, ge=2)
    synonyms: Dict[str, SynonymEntry] = Field(default_factory=dict)


class TrainEvalConfig(BaseModel):
    virtual: Optional[str] = None
    real: Optional[str] = None
    fractions: List[float] = Field(default_factory=lambda: [0.05, 0.1, 1.0])
    folds: int = Field(default=3, ge=2)
    seeds: int = Field(default=5, gt=0)
    variant: TdostVariant = TdostVariant.BASIC
    mix: bool = False
    train: TrainConfig = Field(default_factory=TrainConfig)

    @model_validator(mode="after")
    def check_fractions(self) -> "TrainEvalConfig":
        for fraction in self.fractions:
            if not 0 < fraction <= 1:
                raise ValueError(f"real fraction {fraction} must lie in (0, 1]")
        return self


class PipelineConfig(BaseModel):
    homes: List[HomeSpec] = Field(default_factory=list)
    vocabulary: Optional[str] = None
    sim: SimParams = Field(default_factory=SimParams)
    thresholds: GroundingThresholds = Field(default_factory=GroundingThresholds)
    radius: float = Field(default=DEFAULT_RADIUS, gt=0)
    emit_reverse: bool = True
    raw_detections: bool = False
    label_mapping: Optional[str] = None
    labeler: Literal["mapping", "http"] = "mapping"
    repair: Literal["none", "http"] = "none"
    output_dir: str = "out"
    seed: int = 0
    jobs: int = Field(default=1, ge=1)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    train_eval: TrainEvalConfig = Field(default_factory=TrainEvalConfig)

    @model_validator(mode="before")
    @classmethod
    def single_home_shorthand(cls, data: Any) -> Any:
        if isinstance(data, dict) and "layout" in data:
            data = dict(data)
            home = {"layout": data.pop("layout"), "scripts": data.pop("scripts", [])}
            data["homes"] = [home] + list(data.get("homes", []))
        return data
