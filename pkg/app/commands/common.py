import functools
import logging
from typing import Callable

import typer
from pydantic import ValidationError

from app.exceptions import VirtualSenseError

logger = logging.getLogger(__name__)


def handle_errors(func: Callable) -> Callable:
    """Domain errors end the command with exit code 1 and a logged message"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except VirtualSenseError as e:
            logger.error(f"❌ {e}")
            typer.echo(f"error: {e}", err=True)
            raise typer.Exit(code=1)
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(p) for p in first["loc"])
            logger.error(f"❌ {location}: {first['msg']}")
            typer.echo(f"error: {location}: {first['msg']}", err=True)
            raise typer.Exit(code=1)

    return wrapper


def summary(message: str) -> None:
    typer.echo(message, err=True)
