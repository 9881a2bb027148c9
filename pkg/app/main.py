import logging

import typer

from app.commands import (
    export_command,
    generate_command,
    ground_command,
    instrument_command,
    simulate_command,
    stats_command,
    train_eval_command,
)
from app.config import settings
from app.logging_config import configure_logging

logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, help=f"{settings.app_name}: virtual ambient-sensor data for smart homes")

app.command("instrument")(instrument_command)
app.command("ground")(ground_command)
app.command("simulate")(simulate_command)
app.command("generate")(generate_command)
app.command("export")(export_command)
app.command("stats")(stats_command)
app.command("train-eval")(train_eval_command)


@app.callback()
def main(
    log_level: str = typer.Option(settings.log_level, "--log-level", help="DEBUG, INFO, WARNING or ERROR"),
    log_format: str = typer.Option(settings.log_format, "--log-format", help="json or text"),
) -> None:
    try:
        configure_logging(log_level, log_format)
    except ValueError as e:
        raise typer.BadParameter(str(e))
    logger.debug(f"🚀 {settings.app_name} {settings.app_version}")
