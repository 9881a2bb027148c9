import logging
from dataclasses import dataclass, field
from datetime import datetime, time, timedelta
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.env.graph import apply_state_change, grab_object, put_object, resolve_object
from app.env.layout_loader import room_centroid
from app.exceptions import PathPlanningError, SimulationError, StateChangeError
from app.schemas.layout import EnvironmentGraph, HomeLayout, ObjectState, StateTransition, Vec3
from app.schemas.script import ActionStep, ActionVerb, Script
from app.schemas.sim import SimParams, StepIssue
from app.script.parser import render_step
from app.sim.paths import plan_path, room_adjacency
from app.sim.trajectory import US_PER_SECOND, StepRange, Trajectory

logger = logging.getLogger(__name__)

MINUTE_US = 60 * US_PER_SECOND
# Object-targeted walks stop this far in front of the object
APPROACH_OFFSET = 0.5
WALK_FORWARD_DISTANCE = 1.0

STATE_VERBS: Dict[ActionVerb, ObjectState] = {
    ActionVerb.OPEN: ObjectState.OPEN,
    ActionVerb.CLOSE: ObjectState.CLOSED,
    ActionVerb.SWITCH_ON: ObjectState.ON,
    ActionVerb.SWITCH_OFF: ObjectState.OFF,
}


@dataclass
class SimulationResult:
    trajectory: Trajectory
    transitions: List[StateTransition]
    issues: List[StepIssue] = field(default_factory=list)
    graph: Optional[EnvironmentGraph] = None

    @property
    def errors(self) -> List[StepIssue]:
        return [issue for issue in self.issues if issue.kind == "error"]


def effective_step_times(steps: Sequence[ActionStep]) -> List[Tuple[int, int]]:
    """(start_us, end_us) per step, in microseconds since the first midnight.

    Steps sharing a start minute split that minute evenly in listed order; only the
    last of them runs to its own end minute, and a zero-length last step keeps the
    rest of its minute. Ends never pass the next step's start.
    """
    n = len(steps)
    starts = [0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and steps[j + 1].start_minute == steps[i].start_minute:
            j += 1
        k = j - i + 1
        base = steps[i].start_minute * MINUTE_US
        for m in range(k):
            starts[i + m] = base + (m * MINUTE_US) // k
        i = j + 1

    times = []
    for i, step in enumerate(steps):
        last_in_group = i + 1 == n or steps[i + 1].start_minute != step.start_minute
        if not last_in_group:
            end = starts[i + 1]
        elif step.end_minute > step.start_minute:
            end = step.end_minute * MINUTE_US
        else:
            end = (step.start_minute + 1) * MINUTE_US
        if i + 1 < n:
            end = min(end, starts[i + 1])
        times.append((starts[i], end))
    return times


def _unit_xz(vector: np.ndarray) -> Optional[np.ndarray]:
    flat = np.array([vector[0], 0.0, vector[2]])
    norm = np.linalg.norm(flat)
    return flat / norm if norm > 1e-12 else None


class _Run:
    """State of one simulation run over a private copy of the environment graph"""

    def __init__(self, script: Script, layout: HomeLayout, params: SimParams):
        self.script = script
        self.layout = layout
        self.params = params
        self.graph = layout.graph.model_copy(deep=True)
        self.adjacency = room_adjacency(layout)
        self.floor_y = layout.floor_y
        self.origin = datetime.combine(params.epoch_date, time())
        self.walk_speed = script.metadata.walk_speed or params.walk_speed
        self.run_speed = max(script.metadata.run_speed or params.run_speed, self.walk_speed)

        self.transitions: List[StateTransition] = []
        self.issues: List[StepIssue] = []
        self.key_t: List[float] = []
        self.key_p: List[np.ndarray] = []

        first_room = layout.room(script.steps[0].room)
        self.position = self._point(room_centroid(layout, first_room))
        self.room = first_room.name
        self.heading = self._initial_heading()

    def _point(self, v: Vec3) -> np.ndarray:
        return np.array([v.x, self.floor_y, v.z], dtype=np.float64)

    def _issue(self, index: int, kind: str, message: str) -> None:
        step = self.script.steps[index]
        self.issues.append(StepIssue(step_index=index, kind=kind, message=message, line=render_step(step)))
        if kind == "error":
            logger.warning(f"⚠️ Step {index} ({step.verb.value}): {message}")
        else:
            logger.debug(f"Step {index} ({step.verb.value}): {message}")

    def _key(self, t: float, p: np.ndarray) -> None:
        if self.key_t and t <= self.key_t[-1]:
            self.key_p[-1] = p.copy()
        else:
            self.key_t.append(float(t))
            self.key_p.append(p.copy())

    def _walk_target(self, step: ActionStep) -> Optional[Tuple[np.ndarray, str]]:
        token = step.objects[0]
        if self.layout.has_room(token):
            return self._point(room_centroid(self.layout, self.layout.room(token))), token
        obj = resolve_object(self.graph, token, step.room)
        if obj is None:
            return None
        centroid = self._point(room_centroid(self.layout, self.layout.room(obj.room)))
        spot = self._point(obj.position)
        offset = centroid - spot
        distance = np.linalg.norm(offset)
        if distance <= APPROACH_OFFSET:
            return centroid, obj.room
        return spot + offset / distance * APPROACH_OFFSET, obj.room

    def _initial_heading(self) -> np.ndarray:
        for step in self.script.steps:
            if step.verb in (ActionVerb.WALK, ActionVerb.RUN):
                target = self._walk_target(step)
                if target is None:
                    continue
                direction = _unit_xz(target[0] - self.position)
                if direction is not None:
                    return direction
        return np.array([1.0, 0.0, 0.0])

    def _room_at(self, p: np.ndarray, preferred: Sequence[str]) -> str:
        for name in preferred:
            if self.layout.room(name).contains_footprint(p[0], p[2]):
                return name
        for room in self.layout.rooms:
            if room.contains_footprint(p[0], p[2]):
                return room.name
        return preferred[0]

    def _travel(self, index: int, path: List[np.ndarray], speed: float, start_us: int, end_us: int) -> bool:
        """Move along path from start_us; returns False when the window ran out first"""
        t = float(start_us)
        for a, b in zip(path, path[1:]):
            length = float(np.linalg.norm(b - a))
            if length == 0.0:
                continue
            duration = length / speed * US_PER_SECOND
            direction = _unit_xz(b - a)
            if t + duration > end_us:
                fraction = (end_us - t) / duration
                self.position = a + fraction * (b - a)
                self._key(end_us, self.position)
                if direction is not None:
                    self.heading = direction
                self._issue(
                    index, "warning",
                    f"travel of {sum(float(np.linalg.norm(q - p)) for p, q in zip(path, path[1:])):.2f} m "
                    f"does not fit the step window; stopped at the window end",
                )
                return False
            t += duration
            self.position = b.copy()
            self._key(t, self.position)
            if direction is not None:
                self.heading = direction
        return True

    def _resolve(self, index: int, step: ActionStep, token: str):
        obj = resolve_object(self.graph, token, step.room)
        if obj is None:
            self._issue(index, "error", f"unknown object '{token}'")
        return obj

    def _step(self, index: int, step: ActionStep, start_us: int, end_us: int) -> None:
        self._key(start_us, self.position)
        verb = step.verb

        if verb in (ActionVerb.WALK, ActionVerb.RUN):
            target = self._walk_target(step)
            if target is None:
                self._issue(index, "error", f"unknown object '{step.objects[0]}'")
                return
            destination, destination_room = target
            try:
                waypoints = plan_path(
                    self.layout,
                    Vec3(x=self.position[0], y=self.position[1], z=self.position[2]),
                    Vec3(x=destination[0], y=destination[1], z=destination[2]),
                    self.room,
                    destination_room,
                    self.adjacency,
                )
            except PathPlanningError as e:
                raise SimulationError(f"step {index}: {e}") from e
            path = [self._point(w) for w in waypoints]
            speed = self.run_speed if verb is ActionVerb.RUN else self.walk_speed
            if self._travel(index, path, speed, start_us, end_us):
                self.room = destination_room
            else:
                self.room = self._room_at(self.position, [destination_room, self.room])
            return

        if verb is ActionVerb.WALK_FORWARD:
            room = self.layout.room(self.room)
            target = self.position + self.heading * WALK_FORWARD_DISTANCE
            target[0] = min(max(target[0], room.bbox_min.x), room.bbox_max.x)
            target[2] = min(max(target[2], room.bbox_min.z), room.bbox_max.z)
            heading = self.heading
            self._travel(index, [self.position.copy(), target], self.walk_speed, start_us, end_us)
            self.heading = heading
            return

        if verb is ActionVerb.TURN_LEFT:
            hx, _, hz = self.heading
            self.heading = np.array([-hz, 0.0, hx])
            return
        if verb is ActionVerb.TURN_RIGHT:
            hx, _, hz = self.heading
            self.heading = np.array([hz, 0.0, -hx])
            return

        resolved = []
        for token in step.objects:
            obj = self._resolve(index, step, token)
            if obj is None:
                return
            resolved.append(obj)

        timestamp = self.origin + timedelta(microseconds=start_us)
        try:
            if verb in STATE_VERBS:
                transition = apply_state_change(self.graph, resolved[0].id, STATE_VERBS[verb], timestamp, index)
                if transition is not None:
                    self.transitions.append(transition)
            elif verb is ActionVerb.GRAB:
                grab_object(self.graph, resolved[0].id)
            elif verb is ActionVerb.PUT:
                put_object(self.graph, resolved[0].id, resolved[1].id)
        except StateChangeError as e:
            self._issue(index, "error", str(e))

    def run(self) -> SimulationResult:
        steps = self.script.steps
        times = effective_step_times(steps)
        for index, (step, (start_us, end_us)) in enumerate(zip(steps, times)):
            self._step(index, step, start_us, end_us)

        t0, t_end = times[0][0], times[-1][1]
        self._key(t_end, self.position)

        dt_us = self.params.dt_us
        n = (t_end - t0) // dt_us + 1
        t_us = t0 + np.arange(n, dtype=np.int64) * dt_us
        key_t = np.asarray(self.key_t)
        key_p = np.vstack(self.key_p)
        grid = t_us.astype(np.float64)
        positions = np.column_stack(
            [np.interp(grid, key_t, key_p[:, axis]) for axis in range(3)]
        )

        starts = np.array([s for s, _ in times], dtype=np.int64)
        ends = np.array([e for _, e in times], dtype=np.int64)
        active = np.searchsorted(starts, t_us, side="right") - 1
        inside = (active >= 0) & (t_us < ends[np.clip(active, 0, None)])
        step_index = np.where(inside, active, -1)
        step_index[t_us == t_end] = len(steps) - 1

        trajectory = Trajectory(
            origin=self.origin,
            t_us=t_us,
            positions=positions,
            step_index=step_index.astype(np.int64),
            step_ranges=[StepRange(i, s, e) for i, (s, e) in enumerate(times)],
        )
        return SimulationResult(trajectory, self.transitions, self.issues, self.graph)


def simulate(script: Script, layout: HomeLayout, params: Optional[SimParams] = None) -> SimulationResult:
    """Run a grounded, time-ordered script against a layout"""
    params = params or SimParams()
    if not script.steps:
        raise SimulationError("script has no steps")
    for index, step in enumerate(script.steps):
        if not layout.has_room(step.room):
            raise SimulationError(f"step {index}: unknown room '{step.room}'")

    result = _Run(script, layout, params).run()
    logger.debug(
        f"Simulated {len(script.steps)} step(s): {len(result.trajectory)} samples, "
        f"{len(result.transitions)} transition(s), {len(result.issues)} issue(s)"
    )
    return result
