from app.sensors.activation import door_device_events
from app.sensors.events import load_sensor_map, merge_events, sensor_map_document, write_sensor_map
from app.sensors.motion import detect_motion, motion_triggers
from app.sensors.placement import calculate_sensor_positions, determine_sensor_count, instrument
