import json
from typing import Optional

import typer

from app.commands.common import handle_errors, summary
from app.config import load_pipeline_config
from app.env.layout_loader import load_layout_file
from app.grounding.grounder import ground_script
from app.pipeline.generate import make_indexes, make_repair_provider
from app.script.parser import render_day, split_day_blocks


@handle_errors
def ground_command(
    layout: str = typer.Option(..., "--layout", help="Home layout JSON"),
    script: str = typer.Option(..., "--script", help="Raw routine text (day file)"),
    out: str = typer.Option("grounded.txt", "--out", help="Grounded day file to write"),
    report: Optional[str] = typer.Option(None, "--report", help="Grounding report JSON"),
    config: Optional[str] = typer.Option(None, "--config", help="Pipeline config JSON"),
    vocabulary: Optional[str] = typer.Option(None, "--vocabulary", help="Vocabulary JSON"),
    tau_act: Optional[float] = typer.Option(None, "--tau-act"),
    tau_obj: Optional[float] = typer.Option(None, "--tau-obj"),
    max_retries: Optional[int] = typer.Option(None, "--max-retries"),
) -> None:
    """Clean and ground LLM routine text into simulator commands."""
    pipeline = load_pipeline_config(
        config,
        {
            "vocabulary": vocabulary,
            "thresholds.tau_act": tau_act,
            "thresholds.tau_obj": tau_obj,
            "thresholds.max_retries": max_retries,
        },
    )
    home = load_layout_file(layout)
    indexes = make_indexes(home, pipeline)
    repair = make_repair_provider(pipeline)

    with open(script, "r", encoding="utf-8") as f:
        text = f.read()
    scripts, reports, documents = [], [], []
    for block in split_day_blocks(text):
        grounded, block_report = ground_script(block.body, home, indexes, pipeline.thresholds, repair, block.metadata)
        scripts.append(grounded)
        reports.append(block_report)
        documents.append({"activity": block.metadata.activity, "report": block_report.model_dump(mode="json")})

    with open(out, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_day(scripts))
    if report:
        with open(report, "w", encoding="utf-8", newline="\n") as f:
            json.dump({"script": script, "blocks": documents}, f, indent=2)
            f.write("\n")

    accepted = sum(r.accepted for r in reports)
    repaired = sum(r.repaired for r in reports)
    discarded = sum(r.discarded for r in reports)
    steps = sum(len(s.steps) for s in scripts)
    summary(
        f"{len(scripts)} block(s), {steps} step(s): {accepted} accepted, "
        f"{repaired} repaired, {discarded} discarded -> {out}"
    )
