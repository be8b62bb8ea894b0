"""
Logging configuration for the grouppld package.
"""

import logging
import sys
from pathlib import Path
from typing import Optional

from ..core.constants import LOG_DATE_FORMAT, LOG_EXTRA_KEYS, LOG_FORMAT, LOGS_DIR


class ExtraFieldsFormatter(logging.Formatter):
    """Formatter that appends known structured ``extra`` fields as key=value pairs."""

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)

        extras = []
        for key in LOG_EXTRA_KEYS:
            if not hasattr(record, key):
                continue
            value = getattr(record, key)
            if isinstance(value, float):
                extras.append(f"{key}={value:.6g}")
            else:
                extras.append(f"{key}={value}")

        if extras:
            message += f" ({', '.join(extras)})"
        return message


def resolve_log_file(log_file: Path) -> Path:
    """Place a bare file name under LOGS_DIR; keep paths with a directory as given."""
    if log_file.parent == Path("."):
        LOGS_DIR.mkdir(exist_ok=True)
        return LOGS_DIR / log_file.name
    log_file.parent.mkdir(parents=True, exist_ok=True)
    return log_file


def setup_logging(
    log_level: str = "WARNING",
    log_file: Optional[Path] = None,
    stream_handler: Optional[logging.Handler] = None,
) -> None:
    """
    Configure logging for the package.

    Args:
        log_level: The logging level to use (default: WARNING)
        log_file: Optional log file; nothing is written to disk without it
        stream_handler: Console handler to use instead of a plain stderr stream
            (the CLI passes a RichHandler)
    """
    numeric_level = getattr(logging, log_level.upper(), logging.WARNING)

    console = stream_handler if stream_handler is not None else logging.StreamHandler(sys.stderr)
    console.setLevel(numeric_level)
    handlers = [console]

    if log_file is not None:
        log_file = resolve_log_file(log_file)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(ExtraFieldsFormatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
        handlers.append(file_handler)

    logging.basicConfig(
        level=numeric_level,
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
        handlers=handlers,
        force=True,
    )

    logger = logging.getLogger("grouppld")
    logger.setLevel(numeric_level)

    logger.debug("Logging configured with level %s", log_level)
    if log_file is not None:
        logger.debug("Logging to file: %s", log_file)
