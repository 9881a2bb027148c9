import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import ValidationError

from app.exceptions import LayoutError
from app.schemas.layout import (
    GEOMETRY_TOL,
    Door,
    Edge,
    EnvironmentGraph,
    HomeLayout,
    Room,
    SceneObject,
    Vec3,
)

logger = logging.getLogger(__name__)


def _format_location(loc) -> str:
    return ".".join(str(part) for part in loc)


def _parse(model, data: Any, prefix: str):
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = _format_location((prefix,) + tuple(first["loc"])) if prefix else _format_location(first["loc"])
        raise LayoutError(first["msg"], location=location) from e


def load_layout(document: Dict[str, Any]) -> HomeLayout:
    """Validate a layout document (already decoded JSON) into a HomeLayout"""
    if not isinstance(document, dict):
        raise LayoutError("layout document must be a JSON object")
    for key in ("name", "rooms"):
        if key not in document:
            raise LayoutError("field required", location=key)

    name = document["name"]
    if not isinstance(name, str) or not name:
        raise LayoutError("name must be a non-empty string", location="name")

    rooms: List[Room] = []
    seen_rooms = set()
    for i, raw in enumerate(document.get("rooms") or []):
        room = _parse(Room, raw, f"rooms.{i}")
        if room.name in seen_rooms:
            raise LayoutError(f"duplicate room name '{room.name}'", location=f"rooms.{i}.name")
        seen_rooms.add(room.name)
        rooms.append(room)

    _check_floor_band(rooms)
    _check_footprint_overlap(rooms)

    nodes: Dict[str, SceneObject] = {}
    for i, raw in enumerate(document.get("objects") or []):
        obj = _parse(SceneObject, raw, f"objects.{i}")
        if obj.id in nodes:
            raise LayoutError(f"duplicate object id '{obj.id}'", location=f"objects.{i}.id")
        if obj.room not in seen_rooms:
            raise LayoutError(
                f"object '{obj.id}' references unknown room '{obj.room}'", location=f"objects.{i}.room"
            )
        owner = next(r for r in rooms if r.name == obj.room)
        if not owner.contains(obj.position):
            raise LayoutError(
                f"object '{obj.id}' position {obj.position.as_list()} lies outside room '{obj.room}'",
                location=f"objects.{i}.position",
            )
        nodes[obj.id] = obj

    edges = [_parse(Edge, raw, f"edges.{i}") for i, raw in enumerate(document.get("edges") or [])]
    try:
        graph = EnvironmentGraph(nodes=nodes, edges=edges)
    except ValidationError as e:
        raise LayoutError(e.errors()[0]["msg"], location="edges") from e

    doors: List[Door] = []
    for i, raw in enumerate(document.get("doors") or []):
        door = _parse(Door, raw, f"doors.{i}")
        for room_name in door.rooms:
            if room_name not in seen_rooms:
                raise LayoutError(f"door references unknown room '{room_name}'", location=f"doors.{i}.rooms")
            room = next(r for r in rooms if r.name == room_name)
            if not room.contains_footprint(door.anchor.x, door.anchor.z):
                raise LayoutError(
                    f"door anchor {door.anchor.as_list()} is outside room '{room_name}'",
                    location=f"doors.{i}.anchor",
                )
        doors.append(door)

    layout = HomeLayout(name=name, rooms=rooms, graph=graph, doors=doors)
    logger.debug(f"Loaded layout '{name}' with {len(rooms)} rooms and {len(nodes)} objects")
    return layout


def _check_floor_band(rooms: List[Room]) -> None:
    # Single-story homes only: every room must share one floor band
    if not rooms:
        return
    floor = max(r.bbox_min.y for r in rooms)
    ceiling = min(r.bbox_max.y for r in rooms)
    if floor >= ceiling:
        raise LayoutError(
            f"rooms do not share a common floor band (highest floor {floor} >= lowest ceiling {ceiling}); "
            "multi-story layouts are not supported",
            location="rooms",
        )


def _check_footprint_overlap(rooms: List[Room]) -> None:
    for i, a in enumerate(rooms):
        for b in rooms[i + 1:]:
            dx = min(a.bbox_max.x, b.bbox_max.x) - max(a.bbox_min.x, b.bbox_min.x)
            dz = min(a.bbox_max.z, b.bbox_max.z) - max(a.bbox_min.z, b.bbox_min.z)
            if dx > GEOMETRY_TOL and dz > GEOMETRY_TOL:
                raise LayoutError(f"rooms '{a.name}' and '{b.name}' overlap in footprint", location="rooms")


def load_layout_file(path: Union[str, Path]) -> HomeLayout:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except FileNotFoundError as e:
        raise LayoutError(f"layout file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise LayoutError(f"invalid JSON at line {e.lineno}: {e.msg}", location=str(path)) from e
    return load_layout(document)


def dump_layout(layout: HomeLayout) -> Dict[str, Any]:
    """Serialize a HomeLayout back to the layout file schema"""
    return {
        "name": layout.name,
        "rooms": [
            {"name": r.name, "bbox_min": r.bbox_min.as_list(), "bbox_max": r.bbox_max.as_list()}
            for r in layout.rooms
        ],
        "objects": [
            {
                "id": obj.id,
                "class": obj.class_name,
                "room": obj.room,
                "position": obj.position.as_list(),
                "properties": sorted(p.value for p in obj.properties),
                "states": sorted(s.value for s in obj.states),
            }
            for obj in layout.graph.nodes.values()
        ],
        "edges": [
            {"from": e.source, "relation": e.relation.value, "to": e.target} for e in layout.graph.edges
        ],
        "doors": [{"rooms": list(d.rooms), "anchor": d.anchor.as_list()} for d in layout.doors],
    }


def find_all_rooms(layout: HomeLayout) -> List[Room]:
    return list(layout.rooms)


def room_area(room: Room) -> float:
    """Floor footprint (x-extent times z-extent) in square meters"""
    return (room.bbox_max.x - room.bbox_min.x) * (room.bbox_max.z - room.bbox_min.z)


def room_centroid(layout: HomeLayout, room: Room) -> Vec3:
    return Vec3(x=room.center_x, y=layout.floor_y, z=room.center_z)
