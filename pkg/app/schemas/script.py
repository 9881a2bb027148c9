from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ActionVerb(str, Enum):
    """The closed set of simulator verbs; values are the script spelling"""
    WALK = "walk"
    RUN = "run"
    WALK_FORWARD = "walkforward"
    TURN_LEFT = "turnleft"
    TURN_RIGHT = "turnright"
    SIT = "sit"
    STAND_UP = "standup"
    GRAB = "grab"
    OPEN = "open"
    CLOSE = "close"
    PUT = "put"
    SWITCH_ON = "switchon"
    SWITCH_OFF = "switchoff"
    DRINK = "drink"
    TOUCH = "touch"
    LOOK_AT = "lookat"

    @property
    def arity(self) -> int:
        return VERB_ARITY[self]


VERB_ARITY: Dict[ActionVerb, int] = {
    verb: (
        2 if verb is ActionVerb.PUT
        else 0 if verb in (ActionVerb.WALK_FORWARD, ActionVerb.TURN_LEFT, ActionVerb.TURN_RIGHT, ActionVerb.STAND_UP)
        else 1
    )
    for verb in ActionVerb
}


class TimeOfDay(BaseModel):
    model_config = ConfigDict(frozen=True)

    hours: int = Field(..., ge=0, le=23)
    minutes: int = Field(..., ge=0, le=59)

    @property
    def total_minutes(self) -> int:
        return self.hours * 60 + self.minutes

    def __lt__(self, other: "TimeOfDay") -> bool:
        return self.total_minutes < other.total_minutes

    def __le__(self, other: "TimeOfDay") -> bool:
        return self.total_minutes <= other.total_minutes

    def __str__(self) -> str:
        return f"{self.hours:02d}:{self.minutes:02d}"


class ActionStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    verb: ActionVerb
    objects: Tuple[str, ...] = ()
    start: TimeOfDay
    end: TimeOfDay
    room: str = Field(..., min_length=1)
    # Days elapsed since the script start (midnight rollover)
    day_offset: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_step(self) -> "ActionStep":
        if self.end < self.start:
            raise ValueError(f"start {self.start} is after end {self.end}")
        if len(self.objects) != self.verb.arity:
            raise ValueError(f"{self.verb.value} takes {self.verb.arity} object(s), got {len(self.objects)}")
        return self

    @property
    def start_minute(self) -> int:
        """Minutes since the script's first midnight"""
        return self.day_offset * 1440 + self.start.total_minutes

    @property
    def end_minute(self) -> int:
        return self.day_offset * 1440 + self.end.total_minutes


class ScriptMetadata(BaseModel):
    persona: Optional[str] = None
    day: Optional[str] = None
    activity: Optional[str] = None
    location: Optional[str] = None
    label_candidates: List[str] = Field(default_factory=list)
    # Locomotion overrides, e.g. a slower persona
    walk_speed: Optional[float] = Field(default=None, gt=0)
    run_speed: Optional[float] = Field(default=None, gt=0)


class Script(BaseModel):
    metadata: ScriptMetadata = Field(default_factory=ScriptMetadata)
    steps: List[ActionStep] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_order(self) -> "Script":
        for prev, cur in zip(self.steps, self.steps[1:]):
            if cur.start_minute < prev.start_minute:
                raise ValueError(f"steps out of order: {prev.start} then {cur.start}")
        return self


class Diagnostic(BaseModel):
    """One rejected script line"""
    line_number: int
    code: str
    column: int
    message: str
    text: str
