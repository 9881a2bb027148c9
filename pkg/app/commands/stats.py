import json
from typing import Optional

import typer

from app.commands.common import handle_errors, summary
from app.dataset.stats import record_stats
from app.dataset.windows import read_windows_jsonl


@handle_errors
def stats_command(
    windows: str = typer.Option(..., "--windows", help="Windows JSONL"),
    out: Optional[str] = typer.Option(None, "--out", help="Report JSON; printed when omitted"),
) -> None:
    """Corpus statistics over a windows file."""
    stats = record_stats(read_windows_jsonl(windows))
    document = json.dumps(stats.model_dump(mode="json"), indent=2)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(document + "\n")
    else:
        typer.echo(document)
    summary(
        f"{stats.window_count} window(s), triggers min {stats.triggers_min} / max {stats.triggers_max} / "
        f"mean {stats.triggers_mean:.1f}"
    )
