import logging
import math
from typing import List

from app.env.layout_loader import find_all_rooms, room_area
from app.exceptions import SensorPlacementError
from app.schemas.layout import HomeLayout, ObjectProperty, Room, Vec3
from app.schemas.sensors import DEFAULT_RADIUS, BoundSensor, MotionSensor, SensorKind, SensorSuite

logger = logging.getLogger(__name__)

SMALL_ROOM_MAX_AREA = 30.0
MEDIUM_ROOM_MAX_AREA = 60.0
WALL_INSET = 0.3
CEILING_INSET = 0.3


def determine_sensor_count(area: float) -> int:
    """1 sensor up to 30 m², 2 up to 60 m², 3 above"""
    if not math.isfinite(area) or area <= 0:
        raise SensorPlacementError(f"room area must be positive, got {area}")
    if area <= SMALL_ROOM_MAX_AREA:
        return 1
    if area <= MEDIUM_ROOM_MAX_AREA:
        return 2
    return 3


def calculate_sensor_positions(room: Room, count: int) -> List[Vec3]:
    """Corner positions inset from two walls and below the ceiling.

    Corners are used in the order (min x, min z), (max x, max z), (min x, max z).
    """
    if count not in (1, 2, 3):
        raise SensorPlacementError(f"sensor count must be 1, 2 or 3, got {count}")
    lo, hi = room.bbox_min, room.bbox_max
    if hi.x - lo.x <= 2 * WALL_INSET or hi.z - lo.z <= 2 * WALL_INSET:
        raise SensorPlacementError(
            f"room '{room.name}' is too small for {WALL_INSET} m wall insets "
            f"({hi.x - lo.x:.2f} x {hi.z - lo.z:.2f} m)"
        )
    y = hi.y - CEILING_INSET
    if y < lo.y:
        raise SensorPlacementError(f"room '{room.name}' is lower than the {CEILING_INSET} m ceiling inset")

    corners = [
        Vec3(x=lo.x + WALL_INSET, y=y, z=lo.z + WALL_INSET),
        Vec3(x=hi.x - WALL_INSET, y=y, z=hi.z - WALL_INSET),
        Vec3(x=lo.x + WALL_INSET, y=y, z=hi.z - WALL_INSET),
    ]
    return corners[:count]


def instrument(layout: HomeLayout, radius: float = DEFAULT_RADIUS) -> SensorSuite:
    motion: List[MotionSensor] = []
    for room in find_all_rooms(layout):
        count = determine_sensor_count(room_area(room))
        for position in calculate_sensor_positions(room, count):
            motion.append(
                MotionSensor(id=f"M{len(motion) + 1:03d}", room=room.name, position=position, radius=radius)
            )

    objects = sorted(layout.graph.nodes.values(), key=lambda o: o.id)
    doors: List[BoundSensor] = []
    devices: List[BoundSensor] = []
    next_id = 1
    for wanted, kind, target in (
        (ObjectProperty.CAN_OPEN, SensorKind.DOOR, doors),
        (ObjectProperty.HAS_SWITCH, SensorKind.DEVICE, devices),
    ):
        for obj in objects:
            if wanted in obj.properties:
                target.append(
                    BoundSensor(
                        id=f"D{next_id:03d}", kind=kind, object_id=obj.id, object_class=obj.class_name, room=obj.room
                    )
                )
                next_id += 1

    suite = SensorSuite(home=layout.name, motion=motion, doors=doors, devices=devices)
    logger.info(
        f"✅ Instrumented '{layout.name}': {len(motion)} motion, {len(doors)} door, {len(devices)} device sensor(s)"
    )
    return suite
