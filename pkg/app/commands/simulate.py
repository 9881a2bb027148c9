from datetime import datetime
from typing import Optional

import typer

from app.commands.common import handle_errors, summary
from app.env.layout_loader import load_layout_file
from app.exceptions import SimulationError
from app.schemas.sim import SimParams
from app.script.parser import merge_scripts, parse_day
from app.sim.engine import simulate


@handle_errors
def simulate_command(
    layout: str = typer.Option(..., "--layout", help="Home layout JSON"),
    script: str = typer.Option(..., "--script", help="Grounded day file"),
    dt: float = typer.Option(0.2, "--dt", help="Sampling step in seconds"),
    speed: float = typer.Option(1.2, "--speed", help="Walking speed in m/s"),
    run_speed: Optional[float] = typer.Option(None, "--run-speed", help="Running speed in m/s"),
    date: str = typer.Option("2024-01-01", "--date", help="Calendar date of the first script day"),
    out_traj: str = typer.Option("trajectory.csv", "--out-traj"),
    out_transitions: str = typer.Option("transitions.jsonl", "--out-transitions"),
) -> None:
    """Run a grounded script and write the trajectory and state transitions."""
    try:
        epoch = datetime.strptime(date, "%Y-%m-%d").date()
    except ValueError as e:
        raise SimulationError(f"--date must be YYYY-MM-DD, got '{date}'") from e
    params = SimParams(dt=dt, walk_speed=speed, run_speed=max(run_speed or 3.0, speed), epoch_date=epoch)

    home = load_layout_file(layout)
    with open(script, "r", encoding="utf-8") as f:
        scripts, diagnostics = parse_day(f.read())
    for d in diagnostics:
        summary(f"line {d.line_number}, column {d.column}: [{d.code}] {d.message}")
    merged, _, messages = merge_scripts(scripts)
    for message in messages:
        summary(message)

    result = simulate(merged, home, params)
    result.trajectory.write_csv(out_traj)
    with open(out_transitions, "w", encoding="utf-8", newline="\n") as f:
        for transition in result.transitions:
            f.write(transition.model_dump_json() + "\n")
    for issue in result.issues:
        summary(f"step {issue.step_index} {issue.kind}: {issue.message}")
    summary(
        f"{len(merged.steps)} step(s): {len(result.trajectory)} samples -> {out_traj}, "
        f"{len(result.transitions)} transition(s) -> {out_transitions}"
    )
