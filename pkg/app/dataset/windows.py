import bisect
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from app.dataset.labels import LabelProvider, MappingLabelProvider
from app.dataset.tdost import render_sentences
from app.exceptions import DatasetError
from app.schemas.dataset import (
    MAX_WINDOW_EVENTS,
    ActivitySpan,
    ActivityWindow,
    LabelMapping,
    TdostVariant,
    WindowRecord,
    WindowSource,
)
from app.schemas.sensors import SensorEvent

logger = logging.getLogger(__name__)


def check_spans(spans: Sequence[ActivitySpan]) -> List[ActivitySpan]:
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start < prev.end:
            raise DatasetError(
                f"spans overlap: '{prev.activity_name}' ends {prev.end}, '{cur.activity_name}' starts {cur.start}"
            )
    return ordered


def segment_windows_with_stats(
    events: Sequence[SensorEvent],
    spans: Sequence[ActivitySpan],
    mapping: Union[LabelMapping, LabelProvider],
    source: Optional[WindowSource] = None,
) -> Tuple[List[ActivityWindow], int]:
    """One window per span holding its first events in [start, end); returns (windows, dropped spans)"""
    provider = MappingLabelProvider(mapping) if isinstance(mapping, LabelMapping) else mapping
    ordered = check_spans(spans)
    times = [e.timestamp for e in events]

    windows: List[ActivityWindow] = []
    dropped = 0
    for span in ordered:
        lo = bisect.bisect_left(times, span.start)
        hi = bisect.bisect_left(times, span.end)
        if hi == lo:
            dropped += 1
            continue
        windows.append(
            ActivityWindow(
                label=provider.label(span.activity_name),
                span=span,
                events=list(events[lo:min(hi, lo + MAX_WINDOW_EVENTS)]),
                source=source or WindowSource(),
            )
        )
    if dropped:
        logger.info(f"Dropped {dropped} span(s) without sensor events")
    return windows, dropped


def segment_windows(
    events: Sequence[SensorEvent],
    spans: Sequence[ActivitySpan],
    mapping: Union[LabelMapping, LabelProvider],
    source: Optional[WindowSource] = None,
) -> List[ActivityWindow]:
    windows, _ = segment_windows_with_stats(events, spans, mapping, source)
    return windows


def to_record(window: ActivityWindow) -> WindowRecord:
    return WindowRecord(
        label=window.label,
        activity_name=window.span.activity_name,
        start=window.span.start,
        end=window.span.end,
        room=window.span.room,
        source=window.source,
        n_events=len(window.events),
        basic=render_sentences(window, TdostVariant.BASIC),
        temporal=render_sentences(window, TdostVariant.TEMPORAL),
    )


def write_windows_jsonl(records: Iterable[WindowRecord], path: Union[str, Path]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record.model_dump(mode="json"), ensure_ascii=False) + "\n")
            count += 1
    return count


def read_windows_jsonl(path: Union[str, Path]) -> List[WindowRecord]:
    records: List[WindowRecord] = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(WindowRecord.model_validate_json(line))
                except ValidationError as e:
                    raise DatasetError(f"{path}:{number}: {e.errors()[0]['msg']}") from e
    except FileNotFoundError as e:
        raise DatasetError(f"windows file not found: {path}") from e
    return records
