import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, Field

from app.config import config_hash, expand_scripts, settings, validate_inputs
from app.dataset.casas import export_casas
from app.dataset.labels import (
    ActivityNameLabelProvider,
    HttpLabelProvider,
    LabelProvider,
    MappingLabelProvider,
    load_label_mapping,
)
from app.dataset.stats import compute_stats, merge_stats
from app.dataset.windows import segment_windows_with_stats, to_record, write_windows_jsonl
from app.env.layout_loader import load_layout_file
from app.exceptions import PipelineConfigError, VirtualSenseError
from app.grounding.embeddings import make_provider
from app.grounding.grounder import ground_script
from app.grounding.repair import HttpRepairProvider, NullRepairProvider, RepairProvider
from app.grounding.vocabulary import GroundingIndexes, build_indexes, load_vocabulary
from app.schemas.dataset import ActivitySpan, ActivityWindow, DatasetStats, WindowSource
from app.schemas.layout import HomeLayout
from app.schemas.pipeline import PipelineConfig
from app.schemas.sensors import SensorEvent, SensorSuite
from app.script.parser import merge_scripts, split_day_blocks
from app.sensors.activation import door_device_events
from app.sensors.events import merge_events, write_sensor_map
from app.sensors.motion import detect_motion, motion_triggers
from app.sensors.placement import instrument
from app.sim.engine import effective_step_times, simulate

logger = logging.getLogger(__name__)

EVENTS_FILE = "events.casas"
WINDOWS_FILE = "windows.jsonl"
SENSORS_FILE = "sensors.json"
GROUNDING_FILE = "grounding.json"
STATS_FILE = "stats.json"
PROVENANCE_FILE = "provenance.json"
DETECTIONS_FILE = "detections.csv"


@dataclass
class ScriptJob:
    home: str
    layout_path: str
    script_path: str
    # Day files of one home are laid out on consecutive calendar days
    epoch_date: date
    suite: SensorSuite
    config: PipelineConfig


@dataclass
class ScriptResult:
    home: str
    script: str
    events: List[SensorEvent] = field(default_factory=list)
    spans: List[ActivitySpan] = field(default_factory=list)
    windows: List[ActivityWindow] = field(default_factory=list)
    dropped_spans: int = 0
    grounding: Dict[str, Any] = field(default_factory=dict)
    detections: Optional[pd.DataFrame] = None
    fatal: Optional[str] = None


class HomeSummary(BaseModel):
    name: str
    output_dir: str
    scripts: int
    events: int
    stats: DatasetStats
    fatal: List[str] = Field(default_factory=list)


class GenerateReport(BaseModel):
    config_hash: str
    seed: int
    output_dir: str
    homes: List[HomeSummary] = Field(default_factory=list)
    stats: DatasetStats = Field(default_factory=DatasetStats)

    @property
    def fatal_count(self) -> int:
        return sum(len(home.fatal) for home in self.homes)


def home_name(layout_path: Union[str, Path], explicit: Optional[str] = None) -> str:
    return explicit or Path(layout_path).stem


def make_repair_provider(config: PipelineConfig) -> RepairProvider:
    if config.repair == "http":
        return HttpRepairProvider()
    return NullRepairProvider()


def make_label_provider(config: PipelineConfig) -> LabelProvider:
    if config.label_mapping is None:
        return ActivityNameLabelProvider()
    mapping = load_label_mapping(config.label_mapping)
    if config.labeler == "http":
        return HttpLabelProvider(mapping)
    return MappingLabelProvider(mapping)


def make_indexes(layout: HomeLayout, config: PipelineConfig) -> GroundingIndexes:
    vocabulary = load_vocabulary(config.vocabulary) if config.vocabulary else None
    embedding = config.embedding
    provider = make_provider(embedding.provider, embedding.dimension, embedding.synonyms)
    return build_indexes(layout, vocabulary, provider)


def block_spans(merged, owners: List[int], blocks, origin: datetime) -> List[ActivitySpan]:
    """One span per block that kept steps, from its first effective start to its last effective end"""
    times = effective_step_times(merged.steps)
    bounds: Dict[int, List[int]] = {}
    rooms: Dict[int, str] = {}
    for step, owner, (start_us, end_us) in zip(merged.steps, owners, times):
        if owner not in bounds:
            bounds[owner] = [start_us, end_us]
            rooms[owner] = step.room
        else:
            bounds[owner][1] = end_us
    spans = []
    for owner in sorted(bounds):
        start_us, end_us = bounds[owner]
        if end_us <= start_us:
            continue
        activity = blocks[owner].metadata.activity or f"activity_{owner + 1}"
        spans.append(
            ActivitySpan(
                activity_name=activity,
                start=origin + timedelta(microseconds=start_us),
                end=origin + timedelta(microseconds=end_us),
                room=rooms[owner],
            )
        )
    return spans


def process_script(job: ScriptJob) -> ScriptResult:
    """ground -> simulate -> sense -> windows for one day file"""
    config = job.config
    name = Path(job.script_path).name
    result = ScriptResult(home=job.home, script=name, grounding={"script": name})
    try:
        layout = load_layout_file(job.layout_path)
        indexes = make_indexes(layout, config)
        repair = make_repair_provider(config)
        labeler = make_label_provider(config)

        with open(job.script_path, "r", encoding="utf-8") as f:
            text = f.read()
        blocks = split_day_blocks(text)
        scripts, block_reports = [], []
        for block in blocks:
            script, report = ground_script(block.body, layout, indexes, config.thresholds, repair, block.metadata)
            scripts.append(script)
            block_reports.append(
                {
                    "activity": block.metadata.activity,
                    "first_line": block.first_line,
                    "report": report.model_dump(mode="json"),
                }
            )
        merged, owners, merge_messages = merge_scripts(scripts)
        result.grounding = {"script": name, "blocks": block_reports, "merge": merge_messages, "issues": []}
        if not merged.steps:
            logger.warning(f"⚠️ {job.home}/{name}: no grounded steps, nothing to simulate")
            return result

        params = config.sim.model_copy(update={"epoch_date": job.epoch_date})
        sim = simulate(merged, layout, params)
        result.grounding["issues"] = [issue.model_dump(mode="json") for issue in sim.issues]

        motion = motion_triggers(sim.trajectory, job.suite, params)
        activations = door_device_events(sim.transitions, job.suite, config.emit_reverse)
        result.events = merge_events(motion, activations)
        if config.raw_detections:
            detections = detect_motion(sim.trajectory, job.suite)
            detections.insert(0, "script", name)
            result.detections = detections

        origin = datetime.combine(job.epoch_date, time())
        result.spans = block_spans(merged, owners, blocks, origin)
        source = WindowSource(home=job.home, persona=merged.metadata.persona, day=merged.metadata.day, script=name)
        result.windows, result.dropped_spans = segment_windows_with_stats(result.events, result.spans, labeler, source)
        logger.info(
            f"✅ {job.home}/{name}: {len(merged.steps)} step(s), {len(result.events)} event(s), "
            f"{len(result.windows)} window(s)"
        )
    except VirtualSenseError as e:
        result.fatal = f"{job.home}/{name}: {e}"
        logger.error(f"❌ {result.fatal}")
    except OSError as e:
        result.fatal = f"{job.home}/{name}: cannot read script: {e}"
        logger.error(f"❌ {result.fatal}")
    return result


def _write_json(path: Path, document: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, ensure_ascii=False)
        f.write("\n")


def _run_jobs(jobs: List[ScriptJob], workers: int) -> List[ScriptResult]:
    if workers <= 1 or len(jobs) <= 1:
        return [process_script(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order, so aggregation is independent of scheduling
        return list(pool.map(process_script, jobs))


def write_home(
    name: str,
    out_dir: Path,
    suite: SensorSuite,
    results: List[ScriptResult],
    labeler: LabelProvider,
    provenance: Dict[str, Any],
    raw_detections: bool = False,
) -> HomeSummary:
    out_dir.mkdir(parents=True, exist_ok=True)
    fatal = [r.fatal for r in results if r.fatal]
    events = merge_events(*[r.events for r in results])
    spans = [span for r in results for span in r.spans]
    windows = sorted((w for r in results for w in r.windows), key=lambda w: (w.span.start, w.source.script or ""))

    try:
        export_casas(events, spans, labeler, out_dir / EVENTS_FILE)
    except VirtualSenseError as e:
        fatal.append(f"{name}: {e}")
        logger.error(f"❌ {name}: CASAS export failed: {e}")
    write_windows_jsonl((to_record(w) for w in windows), out_dir / WINDOWS_FILE)
    write_sensor_map(suite, out_dir / SENSORS_FILE)
    _write_json(out_dir / GROUNDING_FILE, {"home": name, "scripts": [r.grounding for r in results]})
    stats = compute_stats(windows, sum(r.dropped_spans for r in results))
    _write_json(out_dir / STATS_FILE, stats.model_dump(mode="json"))

    outputs = [EVENTS_FILE, WINDOWS_FILE, SENSORS_FILE, GROUNDING_FILE, STATS_FILE]
    frames = [r.detections for r in results if r.detections is not None]
    if raw_detections and frames:
        pd.concat(frames, ignore_index=True).to_csv(out_dir / DETECTIONS_FILE, index=False, float_format="%.6f")
        outputs.append(DETECTIONS_FILE)
    _write_json(
        out_dir / PROVENANCE_FILE,
        {
            **provenance,
            "home": name,
            "scripts": [r.script for r in results],
            "outputs": outputs,
            "partial": bool(fatal),
            "fatal": fatal,
        },
    )
    return HomeSummary(
        name=name, output_dir=str(out_dir), scripts=len(results), events=len(events), stats=stats, fatal=fatal
    )


def run_generate(config: PipelineConfig) -> GenerateReport:
    """Generate the virtual dataset for every home in the config"""
    validate_inputs(config, generate=True)
    digest = config_hash(config)
    provenance = {"config_hash": digest, "seed": config.seed, "version": settings.app_version}
    out_root = Path(config.output_dir)

    names = [home_name(h.layout, h.name) for h in config.homes]
    if len(set(names)) != len(names):
        raise PipelineConfigError(f"homes: duplicate home names {names}")

    jobs: List[ScriptJob] = []
    suites: Dict[str, SensorSuite] = {}
    for name, home in zip(names, config.homes):
        layout = load_layout_file(home.layout)
        suites[name] = instrument(layout, config.radius)
        for ordinal, script_path in enumerate(expand_scripts(home.scripts)):
            jobs.append(
                ScriptJob(
                    home=name,
                    layout_path=home.layout,
                    script_path=str(script_path),
                    epoch_date=config.sim.epoch_date + timedelta(days=ordinal),
                    suite=suites[name],
                    config=config,
                )
            )
    logger.info(f"🚀 Generating {len(jobs)} day script(s) over {len(names)} home(s) with {config.jobs} worker(s)")
    results = _run_jobs(jobs, config.jobs)

    labeler = make_label_provider(config)
    report = GenerateReport(config_hash=digest, seed=config.seed, output_dir=str(out_root))
    nested = len(names) > 1
    for name in names:
        home_results = [r for r in results if r.home == name]
        out_dir = out_root / name if nested else out_root
        report.homes.append(
            write_home(name, out_dir, suites[name], home_results, labeler, provenance, config.raw_detections)
        )

    report.stats = merge_stats([home.stats for home in report.homes])
    if nested:
        _write_json(out_root / STATS_FILE, report.stats.model_dump(mode="json"))
        _write_json(
            out_root / PROVENANCE_FILE,
            {**provenance, "homes": names, "partial": report.fatal_count > 0},
        )
    if report.fatal_count:
        logger.error(f"❌ Generation finished with {report.fatal_count} fatal error(s)")
    else:
        logger.info(f"✅ Generated {report.stats.window_count} window(s) into {out_root}")
    return report
