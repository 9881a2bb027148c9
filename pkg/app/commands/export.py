from enum import Enum
from typing import Optional

import typer

from app.commands.common import handle_errors, summary
from app.dataset.casas import read_casas, rewrite_casas, write_events_jsonl
from app.sensors.events import load_sensor_map


class ExportFormat(str, Enum):
    CASAS = "casas"
    JSONL = "jsonl"


@handle_errors
def export_command(
    events: str = typer.Option(..., "--events", help="CASAS log produced by generate"),
    out: str = typer.Option(..., "--out"),
    fmt: ExportFormat = typer.Option(ExportFormat.CASAS, "--format"),
    sensors: Optional[str] = typer.Option(None, "--sensors", help="Sensor map restoring kind and room"),
) -> None:
    """Re-export an event log as CASAS text or JSON lines."""
    suite = load_sensor_map(sensors) if sensors else None
    log = read_casas(events, suite)
    if fmt is ExportFormat.CASAS:
        count = rewrite_casas(log, out)
    else:
        count = write_events_jsonl(log, out)
    summary(f"{count} event(s), {len(log.annotations)} annotated span(s) -> {out}")
