"""Logging setup on top of loguru."""

import sys
from typing import Any, Optional, TextIO

from loguru import logger

LOG_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | {name}:{line} - {message}"
)


def configure_logging(level: str = "WARNING", sink: Optional[TextIO] = None) -> int:
    """Replace loguru's default handler with a single sink at the given level.

    Returns the handler id so callers can remove it again.
    """
    logger.remove()
    logger.enable("polarbench")
    target: Any = sink if sink is not None else sys.stderr
    return logger.add(target, level=level.upper(), format=LOG_FORMAT, colorize=False)
