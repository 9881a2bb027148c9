from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.script import ActionStep


class GroundingThresholds(BaseModel):
    tau_act: float = Field(default=0.8, ge=-1.0, le=1.0)
    tau_obj: float = Field(default=0.6, ge=-1.0, le=1.0)
    max_retries: int = Field(default=3, ge=0)


class Substitution(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw: str
    grounded: str
    score: float
    kind: Literal["action", "object"]


class GroundedStep(BaseModel):
    step: ActionStep
    substitutions: List[Substitution] = Field(default_factory=list)


class Flagged(BaseModel):
    """A line that could not be grounded as written"""
    line: str
    reason: str
    room: Optional[str] = None
    token: Optional[str] = None
    best_token: Optional[str] = None
    score: Optional[float] = None


class Accepted(BaseModel):
    outcome: Literal["accepted"] = "accepted"
    substitutions: List[Substitution] = Field(default_factory=list)


class Repaired(BaseModel):
    outcome: Literal["repaired"] = "repaired"
    attempts: int
    repaired_line: str
    substitutions: List[Substitution] = Field(default_factory=list)


class Discarded(BaseModel):
    outcome: Literal["discarded"] = "discarded"
    reason: str
    attempts: int = 0


class LineOutcome(BaseModel):
    line_number: int
    line: str
    result: Union[Accepted, Repaired, Discarded] = Field(..., discriminator="outcome")


class GroundingReport(BaseModel):
    lines: List[LineOutcome] = Field(default_factory=list)
    dropped_lines: int = Field(default=0, description="lines the cleaner did not recognise")

    def count(self, outcome: str) -> int:
        return sum(1 for line in self.lines if line.result.outcome == outcome)

    @property
    def accepted(self) -> int:
        return self.count("accepted")

    @property
    def repaired(self) -> int:
        return self.count("repaired")

    @property
    def discarded(self) -> int:
        return self.count("discarded")


class VocabularyObject(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    class_name: str = Field(..., min_length=1, alias="class")
    rooms: List[str] = Field(default_factory=list)


class Vocabulary(BaseModel):
    """Simulator vocabulary file: {actions: [...], objects: [{class, rooms}]}"""
    actions: List[str] = Field(default_factory=list)
    objects: List[VocabularyObject] = Field(default_factory=list)
