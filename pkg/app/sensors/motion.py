import logging
from typing import List

import numpy as np
import pandas as pd

from app.schemas.sensors import MotionSensor, SensorEvent, SensorKind, SensorSuite, SensorValue
from app.schemas.sim import SimParams
from app.sim.trajectory import Trajectory

logger = logging.getLogger(__name__)

DETECTION_COLUMNS = ["sample", "t", "sensor_id", "room", "x", "y", "z", "distance"]


def _sensor_distances(trajectory: Trajectory, sensor: MotionSensor) -> np.ndarray:
    centre = np.array([sensor.position.x, sensor.position.y, sensor.position.z])
    return np.linalg.norm(trajectory.positions - centre, axis=1)


def detect_motion(trajectory: Trajectory, suite: SensorSuite) -> pd.DataFrame:
    """Every (sample, sensor) pair with the agent inside the detection radius"""
    frames = []
    for sensor in suite.motion:
        distance = _sensor_distances(trajectory, sensor)
        hits = np.flatnonzero(distance <= sensor.radius)
        if hits.size == 0:
            continue
        frames.append(
            pd.DataFrame(
                {
                    "sample": hits,
                    "t": trajectory.t_us[hits] / 1_000_000,
                    "sensor_id": sensor.id,
                    "room": sensor.room,
                    "x": trajectory.positions[hits, 0],
                    "y": trajectory.positions[hits, 1],
                    "z": trajectory.positions[hits, 2],
                    "distance": distance[hits],
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=DETECTION_COLUMNS)
    return pd.concat(frames, ignore_index=True).sort_values(["sample", "sensor_id"], kind="stable").reset_index(
        drop=True
    )


def moving_mask(trajectory: Trajectory, eps: float) -> np.ndarray:
    """Samples whose displacement from the previous sample exceeds eps; the first never does"""
    moved = np.zeros(len(trajectory), dtype=bool)
    if len(trajectory) > 1:
        moved[1:] = np.linalg.norm(np.diff(trajectory.positions, axis=0), axis=1) > eps
    return moved


def motion_triggers(trajectory: Trajectory, suite: SensorSuite, params: SimParams) -> List[SensorEvent]:
    """ON at the start of each run of near-and-moving samples, OFF at the first sample after it.

    A run still active at the last sample has no OFF.
    """
    moved = moving_mask(trajectory, params.jitter_eps)
    events: List[SensorEvent] = []
    for sensor in suite.motion:
        active = (_sensor_distances(trajectory, sensor) <= sensor.radius) & moved
        edges = np.diff(np.concatenate(([0], active.astype(np.int8))))
        for i in np.flatnonzero(edges):
            value = SensorValue.ON if edges[i] > 0 else SensorValue.OFF
            events.append(
                SensorEvent(
                    timestamp=trajectory.timestamp(int(i)),
                    sensor_id=sensor.id,
                    kind=SensorKind.MOTION,
                    value=value,
                    room=sensor.room,
                )
            )
    events.sort(key=lambda e: e.sort_key)
    logger.debug(f"Derived {len(events)} motion event(s) from {len(trajectory)} samples")
    return events
