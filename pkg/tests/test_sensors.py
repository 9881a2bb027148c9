import tempfile
import unittest
from datetime import datetime, timedelta
from pathlib import Path
import sys

import numpy as np

# Ensure the project root is on sys.path so 'app' package is importable
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from app.env import load_layout, load_layout_file
from app.exceptions import SensorPlacementError
from app.schemas.layout import ObjectState, Room, StateTransition, Vec3
from app.schemas.sensors import MotionSensor, SensorEvent, SensorKind, SensorSuite, SensorValue
from app.schemas.sim import SimParams
from app.sensors.activation import door_device_events
from app.sensors.events import load_sensor_map, merge_events, sensor_map_document, write_sensor_map
from app.sensors.motion import detect_motion, motion_triggers, moving_mask
from app.sensors.placement import calculate_sensor_positions, determine_sensor_count, instrument
from app.sim.trajectory import Trajectory
from tests.helpers import HOMES_DIR, two_room_document

ORIGIN = datetime(2024, 1, 1)


def line_trajectory(xs, y=0.0, z=0.0):
    n = len(xs)
    positions = np.column_stack([np.asarray(xs, dtype=float), np.full(n, y), np.full(n, z)])
    return Trajectory(
        origin=ORIGIN,
        t_us=np.arange(n, dtype=np.int64) * 200_000,
        positions=positions,
        step_index=np.zeros(n, dtype=np.int64),
    )


def single_sensor_suite(position=(0.0, 0.0, 0.0), radius=1.0):
    sensor = MotionSensor(id="M001", room="kitchen", position=Vec3(x=position[0], y=position[1], z=position[2]),
                          radius=radius)
    return SensorSuite(home="test", motion=[sensor])


class TestPlacement(unittest.TestCase):
    """Motion sensor counts, corners and id assignment"""

    def test_count_by_area(self):
        areas = [1, 30, 30.01, 45, 60, 60.01, 120]
        self.assertEqual([determine_sensor_count(a) for a in areas], [1, 1, 2, 2, 2, 3, 3])

    def test_count_rejects_non_positive_area(self):
        for area in (0, -4, float("nan")):
            with self.assertRaises(SensorPlacementError):
                determine_sensor_count(area)

    def test_corner_positions(self):
        bedroom = Room(name="bedroom", bbox_min=[0, 0, 0], bbox_max=[5, 3, 4])
        positions = calculate_sensor_positions(bedroom, 3)
        expected = [(0.3, 2.7, 0.3), (4.7, 2.7, 3.7), (0.3, 2.7, 3.7)]
        for got, want in zip(positions, expected):
            self.assertAlmostEqual(got.x, want[0])
            self.assertAlmostEqual(got.y, want[1])
            self.assertAlmostEqual(got.z, want[2])
        self.assertEqual(calculate_sensor_positions(bedroom, 1), positions[:1])

    def test_invalid_counts_and_tiny_rooms(self):
        bedroom = Room(name="bedroom", bbox_min=[0, 0, 0], bbox_max=[5, 3, 4])
        with self.assertRaises(SensorPlacementError):
            calculate_sensor_positions(bedroom, 4)
        closet = Room(name="closet", bbox_min=[0, 0, 0], bbox_max=[0.5, 3, 2])
        with self.assertRaises(SensorPlacementError):
            calculate_sensor_positions(closet, 1)

    def test_instrument_bundled_home(self):
        suite = instrument(load_layout_file(HOMES_DIR / "home_a.json"))
        self.assertEqual(
            [(s.id, s.room) for s in suite.motion],
            [("M001", "bedroom"), ("M002", "kitchen"), ("M003", "kitchen"), ("M004", "bathroom")],
        )
        self.assertEqual([(s.id, s.object_id) for s in suite.doors], [("D001", "fridge_1"), ("D002", "wardrobe_1")])
        self.assertEqual(
            [(s.id, s.object_id) for s in suite.devices],
            [
                ("D003", "coffeemaker_1"),
                ("D004", "lightswitch_1"),
                ("D005", "lightswitch_2"),
                ("D006", "sink_1"),
                ("D007", "stove_1"),
                ("D008", "tablelamp_1"),
                ("D009", "toaster_1"),
            ],
        )
        self.assertTrue(all(s.radius == 5.0 for s in suite.motion))

    def test_object_with_both_properties_gets_two_sensors(self):
        suite = instrument(load_layout(two_room_document()), radius=3.0)
        self.assertEqual(suite.door_object_ids, ["fridge_1", "microwave_1"])
        self.assertEqual(suite.device_object_ids, ["lightswitch_1", "microwave_1"])
        ids = [s.id for s in suite.doors + suite.devices]
        self.assertEqual(ids, ["D001", "D002", "D003", "D004"])
        self.assertEqual(suite.motion[0].radius, 3.0)

    def test_sensor_map_round_trip(self):
        suite = instrument(load_layout_file(HOMES_DIR / "home_b.json"))
        document = sensor_map_document(suite)
        self.assertEqual(document["mapping"]["M001"], "Motion livingroom")
        self.assertEqual(document["corner_order"], ["min_x,min_z", "max_x,max_z", "min_x,max_z"])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "sensors.json"
            write_sensor_map(suite, path)
            self.assertEqual(load_sensor_map(path), suite)

    def test_unreadable_sensor_map(self):
        with self.assertRaises(SensorPlacementError):
            load_sensor_map("/nonexistent/sensors.json")


class TestMotion(unittest.TestCase):
    """Motion edges from near-and-moving sample runs"""

    def test_on_off_edges(self):
        trajectory = line_trajectory([0.0, 0.2, 0.4, 0.6, 0.6, 0.6, 0.8, 1.0, 1.2, 1.4])
        events = motion_triggers(trajectory, single_sensor_suite(), SimParams())
        observed = [(e.value, e.timestamp) for e in events]
        step = timedelta(microseconds=200_000)
        self.assertEqual(
            observed,
            [
                (SensorValue.ON, ORIGIN + 1 * step),
                (SensorValue.OFF, ORIGIN + 4 * step),
                (SensorValue.ON, ORIGIN + 6 * step),
                (SensorValue.OFF, ORIGIN + 8 * step),
            ],
        )
        self.assertTrue(all(e.kind is SensorKind.MOTION and e.room == "kitchen" for e in events))

    def test_run_active_at_end_has_no_off(self):
        trajectory = line_trajectory([0.0, 0.2, 0.4, 0.6])
        events = motion_triggers(trajectory, single_sensor_suite(), SimParams())
        self.assertEqual([e.value for e in events], [SensorValue.ON])

    def test_standing_still_never_fires(self):
        trajectory = line_trajectory([0.5] * 20)
        self.assertEqual(motion_triggers(trajectory, single_sensor_suite(), SimParams()), [])
        self.assertFalse(moving_mask(trajectory, 0.1).any())

    def test_jitter_below_threshold_ignored(self):
        trajectory = line_trajectory([0.0, 0.05, 0.1, 0.15, 0.2])
        self.assertEqual(motion_triggers(trajectory, single_sensor_suite(), SimParams()), [])
        self.assertEqual(len(motion_triggers(trajectory, single_sensor_suite(), SimParams(jitter_eps=0.01))), 1)

    def test_radius_is_three_dimensional(self):
        suite = single_sensor_suite(position=(0.0, 2.7, 0.0), radius=5.0)
        reach = np.sqrt(5.0 ** 2 - 2.7 ** 2)
        trajectory = line_trajectory([reach - 0.01, reach + 0.01])
        frame = detect_motion(trajectory, suite)
        self.assertEqual(frame["sample"].tolist(), [0])
        self.assertLessEqual(frame["distance"].iloc[0], 5.0)

    def test_detect_motion_empty_frame(self):
        frame = detect_motion(line_trajectory([10.0, 11.0]), single_sensor_suite())
        self.assertTrue(frame.empty)
        self.assertIn("sensor_id", frame.columns)


class TestActivation(unittest.TestCase):
    """Door and device events from object state transitions"""

    def setUp(self):
        self.suite = instrument(load_layout(two_room_document()))

    def transition(self, object_id, object_class, before, after, minute=0):
        return StateTransition(
            timestamp=ORIGIN + timedelta(minutes=minute), object_id=object_id, object_class=object_class,
            room="kitchen", from_state=before, to_state=after,
        )

    def test_fridge_open_close(self):
        transitions = [
            self.transition("fridge_1", "fridge", ObjectState.CLOSED, ObjectState.OPEN, 0),
            self.transition("fridge_1", "fridge", ObjectState.OPEN, ObjectState.CLOSED, 1),
        ]
        events = door_device_events(transitions, self.suite)
        self.assertEqual([(e.sensor_id, e.kind, e.value) for e in events],
                         [("D001", SensorKind.DOOR, SensorValue.OPEN), ("D001", SensorKind.DOOR, SensorValue.CLOSE)])
        self.assertEqual(events[0].object_class, "fridge")

    def test_reverse_events_optional(self):
        transitions = [
            self.transition("fridge_1", "fridge", ObjectState.CLOSED, ObjectState.OPEN, 0),
            self.transition("fridge_1", "fridge", ObjectState.OPEN, ObjectState.CLOSED, 1),
        ]
        events = door_device_events(transitions, self.suite, emit_reverse=False)
        self.assertEqual([e.value for e in events], [SensorValue.OPEN])

    def test_microwave_door_and_switch_are_separate(self):
        transitions = [
            self.transition("microwave_1", "microwave", ObjectState.CLOSED, ObjectState.OPEN, 0),
            self.transition("microwave_1", "microwave", ObjectState.OFF, ObjectState.ON, 1),
            self.transition("microwave_1", "microwave", ObjectState.ON, ObjectState.OFF, 2),
        ]
        events = door_device_events(transitions, self.suite)
        self.assertEqual(
            [(e.sensor_id, e.value) for e in events],
            [("D002", SensorValue.OPEN), ("D004", SensorValue.ON), ("D004", SensorValue.OFF)],
        )

    def test_close_without_open_emits_nothing(self):
        transitions = [self.transition("fridge_1", "fridge", None, ObjectState.CLOSED)]
        self.assertEqual(door_device_events(transitions, self.suite), [])

    def test_unbound_object_ignored(self):
        transitions = [self.transition("mug_1", "mug", None, ObjectState.ON)]
        self.assertEqual(door_device_events(transitions, self.suite), [])


class TestMergeEvents(unittest.TestCase):
    """Chronological merge with a stable tie-break"""

    def event(self, sensor_id, kind, value, seconds=0):
        return SensorEvent(timestamp=ORIGIN + timedelta(seconds=seconds), sensor_id=sensor_id, kind=kind,
                           value=value, room="kitchen")

    def test_tie_break_by_kind_then_id(self):
        motion = [self.event("M002", SensorKind.MOTION, SensorValue.ON), self.event("M001", SensorKind.MOTION,
                                                                                     SensorValue.ON)]
        doors = [self.event("D002", SensorKind.DOOR, SensorValue.OPEN)]
        devices = [self.event("D001", SensorKind.DEVICE, SensorValue.ON)]
        merged = merge_events(motion, doors, devices)
        self.assertEqual([e.sensor_id for e in merged], ["D001", "D002", "M001", "M002"])

    def test_chronological(self):
        a = [self.event("M001", SensorKind.MOTION, SensorValue.ON, 5), self.event("M001", SensorKind.MOTION,
                                                                                  SensorValue.OFF, 9)]
        b = [self.event("D001", SensorKind.DOOR, SensorValue.OPEN, 7)]
        merged = merge_events(a, b)
        self.assertEqual([e.timestamp.second for e in merged], [5, 7, 9])

    def test_event_value_must_fit_kind(self):
        with self.assertRaises(ValueError):
            self.event("D001", SensorKind.DOOR, SensorValue.ON)



class TestRandomized(unittest.TestCase):
    """Placement geometry and motion edges against brute-force checks"""

    def test_placement_geometry_on_random_rooms(self):
        rng = np.random.default_rng(11)
        for i in range(500):
            lo = rng.uniform(-10, 10, size=3)
            size = np.array([rng.uniform(0.7, 15), rng.uniform(2.0, 4.0), rng.uniform(0.7, 15)])
            hi = lo + size
            room = Room(name=f"room_{i}", bbox_min=lo.tolist(), bbox_max=hi.tolist())
            count = determine_sensor_count(size[0] * size[2])
            for p in calculate_sensor_positions(room, count):
                self.assertTrue(lo[0] <= p.x <= hi[0] and lo[1] <= p.y <= hi[1] and lo[2] <= p.z <= hi[2])
                self.assertLess(min(abs(p.x - lo[0] - 0.3), abs(hi[0] - p.x - 0.3)), 1e-9)
                self.assertLess(min(abs(p.z - lo[2] - 0.3), abs(hi[2] - p.z - 0.3)), 1e-9)
                self.assertLess(abs(hi[1] - p.y - 0.3), 1e-9)

    def test_motion_edges_match_per_sample_oracle(self):
        rng = np.random.default_rng(5)
        params = SimParams()
        for _ in range(200):
            n = int(rng.integers(2, 300))
            steps = rng.normal(0, 0.3, size=(n, 3)) * (rng.random((n, 1)) < 0.7)
            steps[:, 1] = 0.0
            steps[0] = 0.0
            positions = np.cumsum(steps, axis=0)
            trajectory = Trajectory(
                origin=ORIGIN,
                t_us=np.arange(n, dtype=np.int64) * 200_000,
                positions=positions,
                step_index=np.zeros(n, dtype=np.int64),
            )
            sensors = []
            for k in range(int(rng.integers(1, 7))):
                centre = positions[int(rng.integers(0, n))] + rng.normal(0, 1.0, size=3)
                sensors.append(MotionSensor(id=f"M{k + 1:03d}", room="kitchen", radius=float(rng.uniform(0.5, 3.0)),
                                            position=Vec3(x=centre[0], y=centre[1], z=centre[2])))
            suite = SensorSuite(home="random", motion=sensors)

            expected = []
            for sensor in sensors:
                centre = np.array([sensor.position.x, sensor.position.y, sensor.position.z])
                active = False
                for i in range(n):
                    moving = i > 0 and np.linalg.norm(positions[i] - positions[i - 1]) > params.jitter_eps
                    now = bool(np.linalg.norm(positions[i] - centre) <= sensor.radius and moving)
                    if now != active:
                        value = SensorValue.ON if now else SensorValue.OFF
                        expected.append((ORIGIN + timedelta(microseconds=200_000 * i), sensor.id, value))
                        active = now
            expected.sort(key=lambda e: (e[0], e[1]))

            events = motion_triggers(trajectory, suite, params)
            self.assertEqual([(e.timestamp, e.sensor_id, e.value) for e in events], expected)
            for sensor in sensors:
                values = [e.value for e in events if e.sensor_id == sensor.id]
                self.assertTrue(all(a != b for a, b in zip(values, values[1:])))


if __name__ == "__main__":
    unittest.main()
