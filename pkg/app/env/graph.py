from datetime import datetime
from typing import Optional

from app.exceptions import StateChangeError
from app.schemas.layout import (
    AGENT_ID,
    STATE_REQUIREMENTS,
    Edge,
    EnvironmentGraph,
    ObjectProperty,
    ObjectState,
    Relation,
    SceneObject,
    StateTransition,
    state_group,
)


def apply_state_change(
    graph: EnvironmentGraph,
    object_id: str,
    new_state: ObjectState,
    timestamp: datetime,
    step_index: Optional[int] = None,
) -> Optional[StateTransition]:
    """Set an object state in place; returns the transition, or None when nothing changed"""
    obj = graph.nodes.get(object_id)
    if obj is None:
        raise StateChangeError(f"unknown object '{object_id}'")
    required = STATE_REQUIREMENTS[new_state]
    if required not in obj.properties:
        raise StateChangeError(
            f"state {new_state.value} not permitted for '{object_id}' (missing {required.value})"
        )

    previous = obj.state_in_group(new_state)
    if previous == new_state:
        return None

    states = (obj.states - state_group(new_state)) | {new_state}
    graph.nodes[object_id] = obj.model_copy(update={"states": frozenset(states)})
    return StateTransition(
        timestamp=timestamp,
        object_id=object_id,
        object_class=obj.class_name,
        room=obj.room,
        from_state=previous,
        to_state=new_state,
        step_index=step_index,
    )


def resolve_object(graph: EnvironmentGraph, class_name: str, room: Optional[str] = None) -> Optional[SceneObject]:
    """Pick the instance of a class, preferring the given room, lowest id first"""
    candidates = sorted((o for o in graph.nodes.values() if o.class_name == class_name), key=lambda o: o.id)
    if not candidates:
        return None
    if room is not None:
        for obj in candidates:
            if obj.room == room:
                return obj
    return candidates[0]


def is_held(graph: EnvironmentGraph, object_id: str) -> bool:
    return Edge(source=AGENT_ID, relation=Relation.HOLDS, target=object_id) in graph.edge_set()


def grab_object(graph: EnvironmentGraph, object_id: str) -> None:
    """Agent picks the object up; placement edges are dropped, other held objects stay held"""
    if object_id not in graph.nodes:
        raise StateChangeError(f"unknown object '{object_id}'")
    graph.edges = [
        e for e in graph.edges
        if not (e.source == object_id and e.relation in (Relation.ON, Relation.INSIDE))
    ]
    holds = Edge(source=AGENT_ID, relation=Relation.HOLDS, target=object_id)
    if holds not in graph.edges:
        graph.edges.append(holds)


def put_object(graph: EnvironmentGraph, object_id: str, destination_id: str) -> None:
    """Release a held object onto (or into) a destination"""
    if object_id not in graph.nodes:
        raise StateChangeError(f"unknown object '{object_id}'")
    if destination_id not in graph.nodes:
        raise StateChangeError(f"unknown object '{destination_id}'")
    if object_id == destination_id:
        raise StateChangeError(f"cannot put '{object_id}' on itself")
    if not is_held(graph, object_id):
        raise StateChangeError(f"'{object_id}' is not held")

    destination = graph.nodes[destination_id]
    relation = Relation.INSIDE if ObjectProperty.CAN_OPEN in destination.properties else Relation.ON
    graph.edges = [
        e for e in graph.edges
        if not (e.source == AGENT_ID and e.relation == Relation.HOLDS and e.target == object_id)
    ]
    graph.edges.append(Edge(source=object_id, relation=relation, target=destination_id))
