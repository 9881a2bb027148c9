import bisect
import json
import logging
from datetime import datetime, timedelta
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import pandas as pd

from app.dataset.labels import LabelProvider, MappingLabelProvider
from app.dataset.windows import check_spans
from app.exceptions import DatasetError
from app.schemas.dataset import ActivitySpan, LabelMapping
from app.schemas.sensors import SensorEvent, SensorKind, SensorSuite, SensorValue

logger = logging.getLogger(__name__)

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S.%f"
CASAS_COLUMNS = ["date_time", "sensor_id", "value", "label_1", "mark_1", "label_2", "mark_2"]


class SpanAnnotation(NamedTuple):
    label: str
    begin: datetime
    end: datetime


class CasasLog(NamedTuple):
    events: List[SensorEvent]
    annotations: List[SpanAnnotation]


def casas_annotations(
    events: Sequence[SensorEvent], spans: Sequence[ActivitySpan], mapping: Union[LabelMapping, LabelProvider]
) -> Tuple[Dict[int, List[Tuple[str, str]]], List[SpanAnnotation]]:
    """Per-event (label, begin|end) marks and the span annotations they encode"""
    provider = MappingLabelProvider(mapping) if isinstance(mapping, LabelMapping) else mapping
    times = [e.timestamp for e in events]
    marks: Dict[int, List[Tuple[str, str]]] = {}
    annotations: List[SpanAnnotation] = []
    for span in check_spans(spans):
        lo = bisect.bisect_left(times, span.start)
        hi = bisect.bisect_left(times, span.end)
        if hi == lo:
            continue
        label = provider.label(span.activity_name)
        marks.setdefault(lo, []).append((label, "begin"))
        marks.setdefault(hi - 1, []).append((label, "end"))
        annotations.append(SpanAnnotation(label, times[lo], times[hi - 1]))
    return marks, annotations


def format_casas_line(event: SensorEvent, marks: Sequence[Tuple[str, str]] = ()) -> str:
    fields = [event.timestamp.strftime(TIMESTAMP_FORMAT), event.sensor_id, event.value.value]
    for label, mark in marks:
        fields.extend([label, mark])
    return "\t".join(fields)


def export_casas(
    events: Sequence[SensorEvent],
    spans: Sequence[ActivitySpan],
    mapping: Union[LabelMapping, LabelProvider],
    path: Union[str, Path],
) -> int:
    for prev, cur in zip(events, events[1:]):
        if cur.timestamp < prev.timestamp:
            raise DatasetError("events must be chronological for CASAS export")
    marks, _ = casas_annotations(events, spans, mapping)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for i, event in enumerate(events):
                f.write(format_casas_line(event, marks.get(i, ())) + "\n")
    except OSError as e:
        raise DatasetError(f"cannot write CASAS log {path}: {e}") from e
    return len(events)


def _kind_from_id(sensor_id: str, value: SensorValue) -> SensorKind:
    if sensor_id.startswith("M"):
        return SensorKind.MOTION
    return SensorKind.DOOR if value in (SensorValue.OPEN, SensorValue.CLOSE) else SensorKind.DEVICE


def read_casas(path: Union[str, Path], suite: Optional[SensorSuite] = None) -> CasasLog:
    """Parse a CASAS log; a sensor map restores kind, room and bound object"""
    try:
        frame = pd.read_csv(
            path, sep="\t", header=None, names=CASAS_COLUMNS, dtype=str, keep_default_na=False, quoting=3
        )
    except pd.errors.EmptyDataError:
        return CasasLog([], [])
    except FileNotFoundError as e:
        raise DatasetError(f"CASAS log not found: {path}") from e
    # Rows without annotations come back short
    frame = frame.fillna("")

    try:
        stamps = pd.to_datetime(frame["date_time"], format=TIMESTAMP_FORMAT)
    except ValueError as e:
        raise DatasetError(f"{path}: bad timestamp: {e}") from e

    motion = {s.id: s for s in suite.motion} if suite else {}
    bound = {s.id: s for s in suite.doors + suite.devices} if suite else {}

    events: List[SensorEvent] = []
    annotations: List[SpanAnnotation] = []
    open_spans: Dict[str, datetime] = {}
    for row, stamp in zip(frame.itertuples(index=False), stamps):
        timestamp = stamp.to_pydatetime()
        try:
            value = SensorValue(row.value)
        except ValueError as e:
            raise DatasetError(f"{path}: unknown value '{row.value}' for {row.sensor_id}") from e
        if row.sensor_id in motion:
            kind, room, object_class, object_id = SensorKind.MOTION, motion[row.sensor_id].room, None, None
        elif row.sensor_id in bound:
            sensor = bound[row.sensor_id]
            kind, room, object_class, object_id = sensor.kind, sensor.room, sensor.object_class, sensor.object_id
        else:
            kind, room, object_class, object_id = _kind_from_id(row.sensor_id, value), "", None, None
        events.append(
            SensorEvent(
                timestamp=timestamp, sensor_id=row.sensor_id, kind=kind, value=value,
                room=room, object_class=object_class, object_id=object_id,
            )
        )
        for label, mark in ((row.label_1, row.mark_1), (row.label_2, row.mark_2)):
            if not label:
                continue
            if mark == "begin":
                open_spans[label] = timestamp
            elif mark == "end":
                begin = open_spans.pop(label, None)
                if begin is None:
                    raise DatasetError(f"{path}: '{label} end' at {timestamp} without a begin")
                annotations.append(SpanAnnotation(label, begin, timestamp))
            else:
                raise DatasetError(f"{path}: unknown annotation mark '{mark}'")
    if open_spans:
        logger.warning(f"⚠️ {path}: {len(open_spans)} span(s) never closed")
    return CasasLog(events, annotations)


class _KeepLabels:
    """Annotations already carry target labels"""

    def label(self, activity_name: str, routine_text: str = "") -> str:
        return activity_name


def annotation_spans(annotations: Sequence[SpanAnnotation]) -> List[ActivitySpan]:
    """Half-open spans that cover each annotation's first and last event"""
    return [
        ActivitySpan(activity_name=a.label, start=a.begin, end=a.end + timedelta(microseconds=1))
        for a in annotations
    ]


def rewrite_casas(log: CasasLog, path: Union[str, Path]) -> int:
    return export_casas(log.events, annotation_spans(log.annotations), _KeepLabels(), path)


def write_events_jsonl(log: CasasLog, path: Union[str, Path]) -> int:
    """One event per line with the label of the annotation covering it, if any"""
    ordered = sorted(log.annotations, key=lambda a: a.begin)
    begins = [a.begin for a in ordered]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for event in log.events:
            i = bisect.bisect_right(begins, event.timestamp) - 1
            label = ordered[i].label if i >= 0 and event.timestamp <= ordered[i].end else None
            f.write(json.dumps({**event.model_dump(mode="json"), "label": label}, ensure_ascii=False) + "\n")
    return len(log.events)
