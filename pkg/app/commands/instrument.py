import typer

from app.commands.common import handle_errors, summary
from app.env.layout_loader import load_layout_file
from app.schemas.sensors import DEFAULT_RADIUS
from app.sensors.events import write_sensor_map
from app.sensors.placement import instrument


@handle_errors
def instrument_command(
    layout: str = typer.Option(..., "--layout", help="Home layout JSON"),
    out: str = typer.Option("sensors.json", "--out", help="Sensor map to write"),
    radius: float = typer.Option(DEFAULT_RADIUS, "--radius", help="Motion detection radius in meters"),
) -> None:
    """Place motion sensors and bind door/device sensors for a layout."""
    home = load_layout_file(layout)
    suite = instrument(home, radius)
    write_sensor_map(suite, out)
    summary(
        f"{suite.home}: {len(suite.motion)} motion, {len(suite.doors)} door, "
        f"{len(suite.devices)} device sensor(s) -> {out}"
    )
