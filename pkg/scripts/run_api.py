#!/usr/bin/env python
"""Serve the polarbench REST API with uvicorn.

Defaults come from the same environment variables the service reads:
API_HOST, API_PORT, API_MAX_TRIALS and CORS_ORIGINS. API_RELOAD=true
restarts the worker on source changes.
"""

import os

import click
import uvicorn

from polarbench.api.main import API_HOST, API_MAX_TRIALS, API_PORT, CORS_ORIGINS
from polarbench.log_setup import configure_logging

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


@click.command()
@click.option("--host", default=API_HOST, show_default=True)
@click.option("--port", type=click.IntRange(1, 65535), default=API_PORT, show_default=True)
@click.option(
    "--reload/--no-reload",
    default=os.getenv("API_RELOAD", "false").lower() == "true",
    show_default=True,
    help="Restart the worker when polarbench sources change",
)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="INFO",
    show_default=True,
)
def main(host: str, port: int, reload: bool, log_level: str) -> None:
    """Start the construction and simulation service."""
    configure_logging(log_level)
    click.echo(f"🚀 Starting polarbench API on http://{host}:{port}")
    click.echo(f"📚 API Documentation: http://{host}:{port}/docs")
    click.echo(f"🎲 Trials per point capped at {API_MAX_TRIALS} (API_MAX_TRIALS)")
    click.echo(f"🌐 CORS origins: {', '.join(CORS_ORIGINS)}")

    # The import string lets uvicorn re-import the app in reload workers
    uvicorn.run(
        "polarbench.api.main:app",
        host=host,
        port=port,
        reload=reload,
        log_level=log_level.lower(),
    )


if __name__ == "__main__":
    main()
