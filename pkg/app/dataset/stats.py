from collections import Counter
from typing import Sequence

from app.schemas.dataset import ActivityWindow, DatasetStats, WindowRecord


def compute_stats(windows: Sequence[ActivityWindow], dropped_spans: int = 0) -> DatasetStats:
    if not windows:
        return DatasetStats(dropped_spans=dropped_spans)
    sizes = [len(w.events) for w in windows]
    kinds = Counter(event.kind.value for w in windows for event in w.events)
    labels = Counter(w.label for w in windows)
    return DatasetStats(
        window_count=len(windows),
        total_triggers=sum(sizes),
        triggers_min=min(sizes),
        triggers_max=max(sizes),
        triggers_mean=sum(sizes) / len(sizes),
        per_label=dict(sorted(labels.items())),
        per_kind=dict(sorted(kinds.items())),
        dropped_spans=dropped_spans,
    )


def merge_stats(parts: Sequence[DatasetStats]) -> DatasetStats:
    """Combine per-home stats into corpus totals"""
    populated = [p for p in parts if p.window_count]
    dropped = sum(p.dropped_spans for p in parts)
    if not populated:
        return DatasetStats(dropped_spans=dropped)
    count = sum(p.window_count for p in populated)
    total = sum(p.total_triggers for p in populated)
    labels: Counter = Counter()
    kinds: Counter = Counter()
    for p in populated:
        labels.update(p.per_label)
        kinds.update(p.per_kind)
    return DatasetStats(
        window_count=count,
        total_triggers=total,
        triggers_min=min(p.triggers_min for p in populated),
        triggers_max=max(p.triggers_max for p in populated),
        triggers_mean=total / count,
        per_label=dict(sorted(labels.items())),
        per_kind=dict(sorted(kinds.items())),
        dropped_spans=dropped,
    )


def record_stats(records: Sequence[WindowRecord], dropped_spans: int = 0) -> DatasetStats:
    """Stats from a windows JSONL corpus; sensor kinds come from the basic sentences"""
    if not records:
        return DatasetStats(dropped_spans=dropped_spans)
    sizes = [r.n_events for r in records]
    kinds = Counter(sentence.split(" ", 1)[0] for r in records for sentence in r.basic)
    labels = Counter(r.label for r in records)
    return DatasetStats(
        window_count=len(records),
        total_triggers=sum(sizes),
        triggers_min=min(sizes),
        triggers_max=max(sizes),
        triggers_mean=sum(sizes) / len(sizes),
        per_label=dict(sorted(labels.items())),
        per_kind=dict(sorted(kinds.items())),
        dropped_spans=dropped_spans,
    )
