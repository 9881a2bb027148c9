import heapq
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

from pydantic import ValidationError

from app.exceptions import SensorPlacementError
from app.schemas.sensors import SensorEvent, SensorSuite

logger = logging.getLogger(__name__)


def merge_events(*streams: Iterable[SensorEvent]) -> List[SensorEvent]:
    """Chronological merge; equal timestamps order by kind text, then sensor id"""
    ordered = [sorted(stream, key=lambda e: e.sort_key) for stream in streams]
    return list(heapq.merge(*ordered, key=lambda e: e.sort_key))


def sensor_map_document(suite: SensorSuite) -> Dict[str, Any]:
    sensors = [
        {
            "id": s.id,
            "kind": "Motion",
            "room": s.room,
            "position": s.position.as_list(),
            "radius": s.radius,
            "object_id": None,
            "object_class": None,
        }
        for s in suite.motion
    ]
    for s in suite.doors + suite.devices:
        sensors.append(
            {
                "id": s.id,
                "kind": s.kind.value,
                "room": s.room,
                "position": None,
                "radius": None,
                "object_id": s.object_id,
                "object_class": s.object_class,
            }
        )
    return {
        "home": suite.home,
        "corner_order": suite.corner_order,
        "sensors": sensors,
        "mapping": {
            entry["id"]: f"{entry['kind']} {entry['object_class'] or entry['room']}" for entry in sensors
        },
    }


def write_sensor_map(suite: SensorSuite, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(sensor_map_document(suite), f, indent=2)
        f.write("\n")


def suite_from_document(document: Dict[str, Any]) -> SensorSuite:
    motion, doors, devices = [], [], []
    for entry in document.get("sensors", []):
        kind = entry.get("kind")
        if kind == "Motion":
            motion.append({k: entry[k] for k in ("id", "room", "position", "radius")})
        elif kind in ("Door", "Device"):
            bound = {k: entry[k] for k in ("id", "kind", "object_id", "object_class", "room")}
            (doors if kind == "Door" else devices).append(bound)
        else:
            raise SensorPlacementError(f"sensor '{entry.get('id')}' has unknown kind '{kind}'")
    try:
        return SensorSuite(
            home=document.get("home", ""),
            motion=motion,
            doors=doors,
            devices=devices,
            corner_order=document.get("corner_order") or [],
        )
    except ValidationError as e:
        raise SensorPlacementError(f"invalid sensor map: {e.errors()[0]['msg']}") from e


def load_sensor_map(path: Union[str, Path]) -> SensorSuite:
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SensorPlacementError(f"cannot read sensor map {path}: {e}") from e
    return suite_from_document(document)
