from .layout_loader import dump_layout, find_all_rooms, load_layout, load_layout_file, room_area, room_centroid
from .graph import apply_state_change, grab_object, put_object, resolve_object

__all__ = [
    "load_layout",
    "load_layout_file",
    "dump_layout",
    "find_all_rooms",
    "room_area",
    "room_centroid",
    "apply_state_change",
    "grab_object",
    "put_object",
    "resolve_object",
]
