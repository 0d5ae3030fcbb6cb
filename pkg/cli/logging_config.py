"""Logging setup for entry points."""

import logging
from pathlib import Path
from typing import Union

from pythonjsonlogger import jsonlogger

CONSOLE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
JSON_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"
RUN_LOG = "run_log.jsonl"


def setup_logging(verbose: bool = False) -> None:
    """Configure the root logger for console output."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=CONSOLE_FORMAT)


def attach_json_log(output_dir: Union[str, Path]) -> logging.Handler:
    """Add a handler writing one JSON object per record to <output_dir>/run_log.jsonl.

    Returns:
        The handler, so callers can detach it when the run ends
    """
    path = Path(output_dir)
    path.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path / RUN_LOG, mode="w")
    handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


def detach_log(handler: logging.Handler) -> None:
    logging.getLogger().removeHandler(handler)
    handler.close()
