from datetime import date
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SimParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    dt: float = Field(default=0.2, gt=0, description="sampling step in seconds")
    walk_speed: float = Field(default=1.2, gt=0, description="m/s")
    run_speed: float = Field(default=3.0, gt=0, description="m/s")
    jitter_eps: float = Field(default=0.1, ge=0, description="minimum per-sample displacement counted as motion")
    epoch_date: date = Field(default=date(2024, 1, 1))

    @model_validator(mode="after")
    def check_speeds(self) -> "SimParams":
        if self.run_speed < self.walk_speed:
            raise ValueError(f"run_speed {self.run_speed} must be >= walk_speed {self.walk_speed}")
        if round(self.dt * 1_000_000) < 1:
            raise ValueError("dt must be at least one microsecond")
        return self

    @property
    def dt_us(self) -> int:
        return int(round(self.dt * 1_000_000))


class StepIssue(BaseModel):
    """A per-step problem; the run carries on after recording it"""
    step_index: int
    kind: Literal["error", "warning"]
    message: str
    line: Optional[str] = None
