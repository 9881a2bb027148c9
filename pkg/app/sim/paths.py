import logging
from collections import deque
from typing import Dict, List, NamedTuple, Optional

from app.exceptions import PathPlanningError
from app.schemas.layout import GEOMETRY_TOL, HomeLayout, Room, Vec3
from app.env.layout_loader import room_centroid

logger = logging.getLogger(__name__)


class Hop(NamedTuple):
    point: Vec3
    via_door: bool


def _shared_wall_midpoint(a: Room, b: Room, floor_y: float) -> Optional[Vec3]:
    z_lo, z_hi = max(a.bbox_min.z, b.bbox_min.z), min(a.bbox_max.z, b.bbox_max.z)
    x_lo, x_hi = max(a.bbox_min.x, b.bbox_min.x), min(a.bbox_max.x, b.bbox_max.x)
    if z_hi - z_lo > GEOMETRY_TOL:
        for wall_x in (a.bbox_max.x, a.bbox_min.x):
            if abs(wall_x - b.bbox_min.x) <= GEOMETRY_TOL or abs(wall_x - b.bbox_max.x) <= GEOMETRY_TOL:
                return Vec3(x=wall_x, y=floor_y, z=(z_lo + z_hi) / 2.0)
    if x_hi - x_lo > GEOMETRY_TOL:
        for wall_z in (a.bbox_max.z, a.bbox_min.z):
            if abs(wall_z - b.bbox_min.z) <= GEOMETRY_TOL or abs(wall_z - b.bbox_max.z) <= GEOMETRY_TOL:
                return Vec3(x=(x_lo + x_hi) / 2.0, y=floor_y, z=wall_z)
    return None


def room_adjacency(layout: HomeLayout) -> Dict[str, Dict[str, Hop]]:
    """Door pairs plus rooms sharing a wall; the first declared door wins"""
    floor_y = layout.floor_y
    graph: Dict[str, Dict[str, Hop]] = {name: {} for name in layout.room_names}
    for door in layout.doors:
        a, b = door.rooms
        anchor = Vec3(x=door.anchor.x, y=floor_y, z=door.anchor.z)
        graph[a].setdefault(b, Hop(anchor, True))
        graph[b].setdefault(a, Hop(anchor, True))
    for i, a in enumerate(layout.rooms):
        for b in layout.rooms[i + 1:]:
            if b.name in graph[a.name]:
                continue
            midpoint = _shared_wall_midpoint(a, b, floor_y)
            if midpoint is not None:
                graph[a.name][b.name] = Hop(midpoint, False)
                graph[b.name][a.name] = Hop(midpoint, False)
    return graph


def room_sequence(adjacency: Dict[str, Dict[str, Hop]], from_room: str, to_room: str) -> Optional[List[str]]:
    """Shortest room chain by BFS, neighbours visited in name order"""
    previous: Dict[str, Optional[str]] = {from_room: None}
    queue = deque([from_room])
    while queue:
        room = queue.popleft()
        if room == to_room:
            chain = [room]
            while previous[chain[-1]] is not None:
                chain.append(previous[chain[-1]])
            return chain[::-1]
        for neighbour in sorted(adjacency[room]):
            if neighbour not in previous:
                previous[neighbour] = room
                queue.append(neighbour)
    return None


def plan_path(
    layout: HomeLayout,
    start: Vec3,
    end: Vec3,
    from_room: str,
    to_room: str,
    adjacency: Optional[Dict[str, Dict[str, Hop]]] = None,
) -> List[Vec3]:
    for name, point in ((from_room, start), (to_room, end)):
        if not layout.has_room(name):
            raise PathPlanningError(f"unknown room '{name}'")
        if not layout.room(name).contains_footprint(point.x, point.z):
            raise PathPlanningError(f"point {point.as_list()} is outside room '{name}'")

    if start == end:
        return [start]
    if from_room == to_room:
        return [start, end]

    adjacency = adjacency if adjacency is not None else room_adjacency(layout)
    chain = room_sequence(adjacency, from_room, to_room)
    if chain is None:
        raise PathPlanningError(f"no route from '{from_room}' to '{to_room}'")

    hops = [adjacency[a][b] for a, b in zip(chain, chain[1:])]
    waypoints = [start]
    for k, hop in enumerate(hops):
        if k > 0 and not (hops[k - 1].via_door and hop.via_door):
            waypoints.append(room_centroid(layout, layout.room(chain[k])))
        waypoints.append(hop.point)
    waypoints.append(end)

    deduped = [waypoints[0]]
    for point in waypoints[1:]:
        if point != deduped[-1]:
            deduped.append(point)
    return deduped
