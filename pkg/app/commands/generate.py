from typing import List, Optional

import typer

from app.commands.common import handle_errors, summary
from app.config import load_pipeline_config
from app.pipeline.generate import run_generate


@handle_errors
def generate_command(
    config: Optional[str] = typer.Option(None, "--config", help="Pipeline config JSON"),
    layout: Optional[str] = typer.Option(None, "--layout", help="Single home layout (replaces the config's homes)"),
    script: Optional[List[str]] = typer.Option(None, "--script", help="Day file or directory; repeatable"),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    vocabulary: Optional[str] = typer.Option(None, "--vocabulary"),
    label_mapping: Optional[str] = typer.Option(None, "--label-mapping"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    jobs: Optional[int] = typer.Option(None, "--jobs", help="Worker processes for per-script stages"),
    tau_act: Optional[float] = typer.Option(None, "--tau-act"),
    tau_obj: Optional[float] = typer.Option(None, "--tau-obj"),
    max_retries: Optional[int] = typer.Option(None, "--max-retries"),
    radius: Optional[float] = typer.Option(None, "--radius"),
    dt: Optional[float] = typer.Option(None, "--dt"),
    emit_reverse: Optional[bool] = typer.Option(None, "--emit-reverse/--no-emit-reverse"),
    raw_detections: Optional[bool] = typer.Option(None, "--raw-detections/--no-raw-detections"),
) -> None:
    """Ground, simulate and sense every day script; write the virtual dataset."""
    overrides = {
        "output_dir": out,
        "vocabulary": vocabulary,
        "label_mapping": label_mapping,
        "seed": seed,
        "jobs": jobs,
        "thresholds.tau_act": tau_act,
        "thresholds.tau_obj": tau_obj,
        "thresholds.max_retries": max_retries,
        "radius": radius,
        "sim.dt": dt,
        "emit_reverse": emit_reverse,
        "raw_detections": raw_detections,
    }
    if layout:
        overrides["homes"] = [{"layout": layout, "scripts": list(script or [])}]
    report = run_generate(load_pipeline_config(config, overrides))

    for home in report.homes:
        summary(
            f"{home.name}: {home.scripts} script(s), {home.events} event(s), "
            f"{home.stats.window_count} window(s) -> {home.output_dir}"
        )
    stats = report.stats
    summary(
        f"total: {stats.window_count} window(s), triggers min {stats.triggers_min} / "
        f"max {stats.triggers_max} / mean {stats.triggers_mean:.1f}, config {report.config_hash[:12]}"
    )
    if report.fatal_count:
        summary(f"{report.fatal_count} fatal error(s); outputs are partial")
        raise typer.Exit(code=1)
