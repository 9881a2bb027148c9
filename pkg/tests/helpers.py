"""Small layouts and paths shared by the test modules."""
from pathlib import Path
from typing import Any, Dict

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = ROOT / "data"
HOMES_DIR = DATA_DIR / "homes"
SCRIPTS_DIR = DATA_DIR / "scripts"

APPENDIX_BREAKFAST = """\
[walk] <kitchen> (07:10 - 07:10) (kitchen)
[switchon] <coffeemaker> (07:10 - 07:10) (kitchen)
[standup] (07:10 - 07:11) (kitchen)
[grab] <waterglass> (07:11 - 07:11) (kitchen)
[drink] <waterglass> (07:11 - 07:12) (kitchen)
[put] <waterglass> <kitchencounter> (07:12 - 07:13) (kitchen)
[walk] <fridge> (07:13 - 07:13) (kitchen)
[open] <fridge> (07:13 - 07:14) (kitchen)
[grab] <bananas> (07:14 - 07:15) (kitchen)
[close] <fridge> (07:15 - 07:15) (kitchen)
[put] <bananas> <kitchencounter> (07:16 - 07:16) (kitchen)
[walk] <toaster> (07:16 - 07:17) (kitchen)
[switchon] <toaster> (07:17 - 07:17) (kitchen)
[grab] <breadslice> (07:17 - 07:18) (kitchen)
[put] <breadslice> <toaster> (07:18 - 07:18) (kitchen)
[lookat] <toaster> (07:20 - 07:20) (kitchen)
[walk] <kitchentable> (07:20 - 07:21) (kitchen)
[sit] <kitchentable> (07:21 - 07:21) (kitchen)
[lookat] <coffeemaker> (07:21 - 07:22) (kitchen)
[grab] <waterglass> (07:22 - 07:23) (kitchen)
[drink] <waterglass> (07:26 - 07:26) (kitchen)
[put] <waterglass> <kitchencounter> (07:26 - 07:27) (kitchen)
[grab] <coffeepot> (07:27 - 07:30) (kitchen)
"""


def room(name: str, lo, hi) -> Dict[str, Any]:
    return {"name": name, "bbox_min": list(lo), "bbox_max": list(hi)}


def two_room_document() -> Dict[str, Any]:
    """A 5x4 bedroom next to a 7x5 kitchen, one door between them"""
    return {
        "name": "two_rooms",
        "rooms": [
            room("bedroom", (0, 0, 0), (5, 3, 4)),
            room("kitchen", (5, 0, 0), (12, 3, 5)),
        ],
        "doors": [{"rooms": ["bedroom", "kitchen"], "anchor": [5, 0, 2]}],
        "objects": [
            {"id": "bed_1", "class": "bed", "room": "bedroom", "position": [1.5, 0.5, 3.0],
             "properties": ["SURFACE"]},
            {"id": "lightswitch_1", "class": "lightswitch", "room": "bedroom", "position": [0.1, 1.2, 1.5],
             "properties": ["HAS_SWITCH"], "states": ["OFF"]},
            {"id": "fridge_1", "class": "fridge", "room": "kitchen", "position": [11.5, 1.0, 0.5],
             "properties": ["CAN_OPEN"], "states": ["CLOSED"]},
            {"id": "microwave_1", "class": "microwave", "room": "kitchen", "position": [8.0, 1.0, 0.3],
             "properties": ["CAN_OPEN", "HAS_SWITCH"], "states": ["CLOSED", "OFF"]},
            {"id": "mug_1", "class": "mug", "room": "kitchen", "position": [8.5, 0.95, 0.3],
             "properties": ["GRABBABLE"]},
            {"id": "kitchentable_1", "class": "kitchentable", "room": "kitchen", "position": [8.5, 0.75, 3.5],
             "properties": ["SURFACE"]},
        ],
        "edges": [{"from": "mug_1", "relation": "ON", "to": "kitchentable_1"}],
    }
