from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.sensors import SensorEvent

DEFAULT_LABEL = "Other"
MAX_WINDOW_EVENTS = 100


def normalize_activity(name: str) -> str:
    """'Brushing Teeth' / 'brushing-teeth' -> 'brushing_teeth'"""
    return "_".join(name.strip().lower().replace("-", " ").replace("_", " ").split())


class ActivitySpan(BaseModel):
    model_config = ConfigDict(frozen=True)

    activity_name: str
    start: datetime
    end: datetime
    room: Optional[str] = None

    @model_validator(mode="after")
    def check_order(self) -> "ActivitySpan":
        if not self.start < self.end:
            raise ValueError(f"span '{self.activity_name}' must start before it ends")
        return self

    def contains(self, timestamp: datetime) -> bool:
        return self.start <= timestamp < self.end


class LabelMapping(BaseModel):
    """Open-vocabulary activity names -> one target dataset's labels"""
    dataset: str
    labels: List[str] = Field(default_factory=list)
    entries: Dict[str, str] = Field(default_factory=dict)
    default_label: str = DEFAULT_LABEL

    @field_validator("entries")
    @classmethod
    def normalize_keys(cls, v: Dict[str, str]) -> Dict[str, str]:
        return {normalize_activity(k): label for k, label in v.items()}

    @model_validator(mode="after")
    def check_labels(self) -> "LabelMapping":
        if self.labels:
            allowed = set(self.labels) | {self.default_label}
            unknown = sorted({label for label in self.entries.values() if label not in allowed})
            if unknown:
                raise ValueError(f"{self.dataset}: labels outside the label set: {unknown}")
        return self

    @property
    def label_set(self) -> List[str]:
        labels = list(self.labels) if self.labels else sorted(set(self.entries.values()))
        if self.default_label not in labels:
            labels.append(self.default_label)
        return labels


class TdostVariant(str, Enum):
    BASIC = "basic"
    TEMPORAL = "temporal"


class WindowSource(BaseModel):
    model_config = ConfigDict(frozen=True)

    home: Optional[str] = None
    persona: Optional[str] = None
    day: Optional[str] = None
    script: Optional[str] = None


class ActivityWindow(BaseModel):
    label: str
    span: ActivitySpan
    events: List[SensorEvent] = Field(default_factory=list, max_length=MAX_WINDOW_EVENTS)
    source: WindowSource = Field(default_factory=WindowSource)

    @model_validator(mode="after")
    def check_events(self) -> "ActivityWindow":
        for prev, cur in zip(self.events, self.events[1:]):
            if cur.timestamp < prev.timestamp:
                raise ValueError("window events must be chronological")
        for event in self.events:
            if not self.span.contains(event.timestamp):
                raise ValueError(f"event at {event.timestamp} lies outside its window span")
        return self


class WindowRecord(BaseModel):
    """One line of a windows JSONL file"""
    label: str
    activity_name: str
    start: datetime
    end: datetime
    room: Optional[str] = None
    source: WindowSource = Field(default_factory=WindowSource)
    n_events: int
    basic: List[str] = Field(default_factory=list)
    temporal: List[str] = Field(default_factory=list)

    def sentences(self, variant: TdostVariant) -> List[str]:
        return self.basic if variant is TdostVariant.BASIC else self.temporal


class DatasetStats(BaseModel):
    window_count: int = 0
    total_triggers: int = 0
    triggers_min: int = 0
    triggers_max: int = 0
    triggers_mean: float = 0.0
    per_label: Dict[str, int] = Field(default_factory=dict)
    per_kind: Dict[str, int] = Field(default_factory=dict)
    dropped_spans: int = 0
