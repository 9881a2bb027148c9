from app.dataset.casas import (
    CasasLog,
    SpanAnnotation,
    annotation_spans,
    casas_annotations,
    export_casas,
    read_casas,
    rewrite_casas,
    write_events_jsonl,
)
from app.dataset.labels import (
    ActivityNameLabelProvider,
    HttpLabelProvider,
    LabelProvider,
    MappingLabelProvider,
    load_label_mapping,
    map_label,
)
from app.dataset.stats import compute_stats, merge_stats, record_stats
from app.dataset.tdost import number_words, render_sentences, spoken_time, tdost_basic, tdost_temporal
from app.dataset.windows import (
    read_windows_jsonl,
    segment_windows,
    segment_windows_with_stats,
    to_record,
    write_windows_jsonl,
)
