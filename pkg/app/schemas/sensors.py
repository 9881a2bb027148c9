from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.layout import Vec3

DEFAULT_RADIUS = 5.0
CORNER_ORDER = ["min_x,min_z", "max_x,max_z", "min_x,max_z"]


class SensorKind(str, Enum):
    MOTION = "Motion"
    DOOR = "Door"
    DEVICE = "Device"


class SensorValue(str, Enum):
    ON = "ON"
    OFF = "OFF"
    OPEN = "OPEN"
    CLOSE = "CLOSE"


ALLOWED_VALUES: Dict[SensorKind, frozenset] = {
    SensorKind.MOTION: frozenset({SensorValue.ON, SensorValue.OFF}),
    SensorKind.DOOR: frozenset({SensorValue.OPEN, SensorValue.CLOSE}),
    SensorKind.DEVICE: frozenset({SensorValue.ON, SensorValue.OFF}),
}


class MotionSensor(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., pattern=r"^M\d{3,}$")
    room: str
    position: Vec3
    radius: float = Field(default=DEFAULT_RADIUS, gt=0)


class BoundSensor(BaseModel):
    """Door or device sensor attached to one environment object"""
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., pattern=r"^D\d{3,}$")
    kind: SensorKind
    object_id: str
    object_class: str
    room: str

    @model_validator(mode="after")
    def not_motion(self) -> "BoundSensor":
        if self.kind is SensorKind.MOTION:
            raise ValueError("object-bound sensors are Door or Device")
        return self


class SensorSuite(BaseModel):
    home: str = ""
    motion: List[MotionSensor] = Field(default_factory=list)
    doors: List[BoundSensor] = Field(default_factory=list)
    devices: List[BoundSensor] = Field(default_factory=list)
    corner_order: List[str] = Field(default_factory=lambda: list(CORNER_ORDER))

    @model_validator(mode="after")
    def unique_ids(self) -> "SensorSuite":
        ids = [s.id for s in self.motion] + [s.id for s in self.doors] + [s.id for s in self.devices]
        if len(ids) != len(set(ids)):
            raise ValueError("sensor ids must be unique")
        return self

    @property
    def door_object_ids(self) -> List[str]:
        return [s.object_id for s in self.doors]

    @property
    def device_object_ids(self) -> List[str]:
        return [s.object_id for s in self.devices]

    def motion_in(self, room: str) -> List[MotionSensor]:
        return [s for s in self.motion if s.room == room]

    def sensor_rooms(self) -> Dict[str, str]:
        rooms = {s.id: s.room for s in self.motion}
        rooms.update({s.id: s.room for s in self.doors + self.devices})
        return rooms


class SensorEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    timestamp: datetime
    sensor_id: str
    kind: SensorKind
    value: SensorValue
    room: str
    object_class: Optional[str] = None
    object_id: Optional[str] = None

    @model_validator(mode="after")
    def check_value(self) -> "SensorEvent":
        if self.value not in ALLOWED_VALUES[self.kind]:
            raise ValueError(f"{self.kind.value} sensors cannot report {self.value.value}")
        return self

    @property
    def sort_key(self):
        return (self.timestamp, self.kind.value, self.sensor_id)
