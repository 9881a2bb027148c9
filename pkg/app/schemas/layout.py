import math
from datetime import datetime
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Pseudo-node that owns Holds edges; it is never a SceneObject
AGENT_ID = "character"

# Tolerance for "on the wall" geometry checks
GEOMETRY_TOL = 1e-6


class Vec3(BaseModel):
    """Position in meters; y is vertical"""
    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    z: float

    @model_validator(mode="before")
    @classmethod
    def from_sequence(cls, data):
        # Layout files store vectors as [x, y, z]
        if isinstance(data, (list, tuple)):
            if len(data) != 3:
                raise ValueError(f"expected 3 components, got {len(data)}")
            return {"x": data[0], "y": data[1], "z": data[2]}
        return data

    @model_validator(mode="after")
    def check_finite(self) -> "Vec3":
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError("vector components must be finite")
        return self

    def as_list(self) -> List[float]:
        return [self.x, self.y, self.z]


class Room(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    bbox_min: Vec3
    bbox_max: Vec3

    @model_validator(mode="after")
    def check_bbox(self) -> "Room":
        lo, hi = self.bbox_min, self.bbox_max
        if not (lo.x < hi.x and lo.y < hi.y and lo.z < hi.z):
            raise ValueError(f"room '{self.name}': bbox_min must be < bbox_max componentwise")
        return self

    @property
    def center_x(self) -> float:
        return (self.bbox_min.x + self.bbox_max.x) / 2.0

    @property
    def center_z(self) -> float:
        return (self.bbox_min.z + self.bbox_max.z) / 2.0

    def contains(self, p: Vec3, tol: float = GEOMETRY_TOL) -> bool:
        return (
            self.bbox_min.x - tol <= p.x <= self.bbox_max.x + tol
            and self.bbox_min.y - tol <= p.y <= self.bbox_max.y + tol
            and self.bbox_min.z - tol <= p.z <= self.bbox_max.z + tol
        )

    def contains_footprint(self, x: float, z: float, tol: float = GEOMETRY_TOL) -> bool:
        return (
            self.bbox_min.x - tol <= x <= self.bbox_max.x + tol
            and self.bbox_min.z - tol <= z <= self.bbox_max.z + tol
        )


class ObjectProperty(str, Enum):
    CAN_OPEN = "CAN_OPEN"
    HAS_SWITCH = "HAS_SWITCH"
    GRABBABLE = "GRABBABLE"
    SURFACE = "SURFACE"


class ObjectState(str, Enum):
    OPEN = "OPEN"
    CLOSED = "CLOSED"
    ON = "ON"
    OFF = "OFF"


# Which property allows which state
STATE_REQUIREMENTS: Dict[ObjectState, ObjectProperty] = {
    ObjectState.OPEN: ObjectProperty.CAN_OPEN,
    ObjectState.CLOSED: ObjectProperty.CAN_OPEN,
    ObjectState.ON: ObjectProperty.HAS_SWITCH,
    ObjectState.OFF: ObjectProperty.HAS_SWITCH,
}

# States that exclude each other
STATE_GROUPS: Tuple[FrozenSet[ObjectState], ...] = (
    frozenset({ObjectState.OPEN, ObjectState.CLOSED}),
    frozenset({ObjectState.ON, ObjectState.OFF}),
)


def state_group(state: ObjectState) -> FrozenSet[ObjectState]:
    for group in STATE_GROUPS:
        if state in group:
            return group
    raise ValueError(f"unknown state {state}")


class SceneObject(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    id: str = Field(..., min_length=1)
    class_name: str = Field(..., min_length=1, alias="class")
    room: str
    position: Vec3
    properties: FrozenSet[ObjectProperty] = frozenset()
    states: FrozenSet[ObjectState] = frozenset()

    @model_validator(mode="after")
    def check_states(self) -> "SceneObject":
        for group in STATE_GROUPS:
            if len(self.states & group) > 1:
                raise ValueError(
                    f"object '{self.id}' holds conflicting states {sorted(s.value for s in self.states & group)}"
                )
        for state in self.states:
            required = STATE_REQUIREMENTS[state]
            if required not in self.properties:
                raise ValueError(
                    f"object '{self.id}' has state {state.value} without property {required.value}"
                )
        return self

    def state_in_group(self, state: ObjectState) -> Optional[ObjectState]:
        current = self.states & state_group(state)
        return next(iter(current)) if current else None


class Relation(str, Enum):
    ON = "ON"
    INSIDE = "INSIDE"
    NEXT_TO = "NEXT_TO"
    HOLDS = "HOLDS"


class Edge(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    source: str = Field(..., alias="from")
    relation: Relation
    target: str = Field(..., alias="to")

    @model_validator(mode="after")
    def no_self_edge(self) -> "Edge":
        if self.source == self.target:
            raise ValueError(f"self-edge on '{self.source}'")
        return self


class EnvironmentGraph(BaseModel):
    """Objects as nodes, relations as edges; one mutable copy per simulation run"""

    nodes: Dict[str, SceneObject] = Field(default_factory=dict)
    edges: List[Edge] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_edges(self) -> "EnvironmentGraph":
        for edge in self.edges:
            if edge.source not in self.nodes and not (edge.source == AGENT_ID and edge.relation == Relation.HOLDS):
                raise ValueError(f"edge source '{edge.source}' is not a node")
            if edge.target not in self.nodes:
                raise ValueError(f"edge target '{edge.target}' is not a node")
        return self

    def edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnvironmentGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edge_set() == other.edge_set()


class Door(BaseModel):
    model_config = ConfigDict(frozen=True)

    rooms: Tuple[str, str]
    anchor: Vec3

    @field_validator("rooms")
    @classmethod
    def distinct_rooms(cls, v: Tuple[str, str]) -> Tuple[str, str]:
        if v[0] == v[1]:
            raise ValueError(f"door connects room '{v[0]}' to itself")
        return v


class HomeLayout(BaseModel):
    """The simulated world; immutable after load"""
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    rooms: List[Room]
    graph: EnvironmentGraph = Field(default_factory=EnvironmentGraph)
    doors: List[Door] = Field(default_factory=list)

    def room(self, name: str) -> Room:
        for room in self.rooms:
            if room.name == name:
                return room
        raise KeyError(name)

    def has_room(self, name: str) -> bool:
        return any(room.name == name for room in self.rooms)

    @property
    def room_names(self) -> List[str]:
        return [room.name for room in self.rooms]

    @property
    def floor_y(self) -> float:
        """Height of the shared floor band the agent walks on"""
        return max(room.bbox_min.y for room in self.rooms) if self.rooms else 0.0

    def objects_in(self, room_name: str) -> List[SceneObject]:
        return sorted(
            (obj for obj in self.graph.nodes.values() if obj.room == room_name),
            key=lambda o: o.id,
        )


class StateTransition(BaseModel):
    """Record of one object state change; from_state is None for a first-time state"""
    model_config = ConfigDict(frozen=True)

    timestamp: datetime
    object_id: str
    object_class: str
    room: str
    from_state: Optional[ObjectState] = None
    to_state: ObjectState
    step_index: Optional[int] = None

    @model_validator(mode="after")
    def check_changed(self) -> "StateTransition":
        if self.from_state == self.to_state:
            raise ValueError("a transition must change the state")
        return self
