from typing import Dict, List, Optional, Sequence

from app.schemas.layout import ObjectState, StateTransition
from app.schemas.sensors import BoundSensor, SensorEvent, SensorKind, SensorSuite, SensorValue

# (kind, new state) -> event value, for the forward transitions
_FORWARD = {
    (SensorKind.DOOR, ObjectState.OPEN): SensorValue.OPEN,
    (SensorKind.DEVICE, ObjectState.ON): SensorValue.ON,
}
_REVERSE = {
    (SensorKind.DOOR, ObjectState.CLOSED): (ObjectState.OPEN, SensorValue.CLOSE),
    (SensorKind.DEVICE, ObjectState.OFF): (ObjectState.ON, SensorValue.OFF),
}


def _value_for(sensor: BoundSensor, transition: StateTransition, emit_reverse: bool) -> Optional[SensorValue]:
    forward = _FORWARD.get((sensor.kind, transition.to_state))
    if forward is not None:
        # No recorded state counts as closed / off
        return forward
    reverse = _REVERSE.get((sensor.kind, transition.to_state))
    if reverse is not None and emit_reverse and transition.from_state == reverse[0]:
        return reverse[1]
    return None


def door_device_events(
    transitions: Sequence[StateTransition], suite: SensorSuite, emit_reverse: bool = True
) -> List[SensorEvent]:
    bound: Dict[str, List[BoundSensor]] = {}
    for sensor in suite.doors + suite.devices:
        bound.setdefault(sensor.object_id, []).append(sensor)

    events: List[SensorEvent] = []
    for transition in transitions:
        for sensor in bound.get(transition.object_id, ()):
            value = _value_for(sensor, transition, emit_reverse)
            if value is None:
                continue
            events.append(
                SensorEvent(
                    timestamp=transition.timestamp,
                    sensor_id=sensor.id,
                    kind=sensor.kind,
                    value=value,
                    room=transition.room,
                    object_class=transition.object_class,
                    object_id=transition.object_id,
                )
            )
    return events
