"""Utility module for the application.

This module contains the shared logger and its per-run adapter.
"""

import logging
from functools import lru_cache
from typing import Any, Final, MutableMapping

from rich.console import Console
from rich.logging import RichHandler

from src.core.config import settings


class Logger:
    """A singleton logger class for the application.

    This class implements a singleton pattern to ensure only one logger instance
    exists throughout the application lifetime. It uses Rich for console output
    on stderr, so command output files and stdout stay clean.

    Example:
        >>> logger = Logger.get_instance()
        >>> logger.info("Epoch %s done", 3)
    """

    _INSTANCE: Final[logging.Logger] = logging.getLogger("protodiv")

    def __init__(self) -> None:
        """Initialize the logger configuration.

        This should not be called directly. Use get_instance() instead.
        """
        raise RuntimeError("Use get_instance() instead")

    @classmethod
    @lru_cache(maxsize=1)
    def get_instance(cls) -> logging.Logger:
        """Get the singleton logger instance.

        Returns:
            logging.Logger: The configured logger instance.
        """
        handler = RichHandler(
            rich_tracebacks=True, console=Console(width=127, stderr=True)
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        cls._INSTANCE.handlers = [handler]
        cls._INSTANCE.setLevel(settings.LOG_LEVEL)
        cls._INSTANCE.propagate = False
        return cls._INSTANCE


def get_logger() -> logging.Logger:
    """Get the application logger instance.

    Returns:
        logging.Logger: The configured logger instance.

    Example:
        >>> logger = get_logger()
        >>> logger.debug("Retrying generation with sub-seed %s", 7)
    """
    return Logger.get_instance()


class RunLogger(logging.LoggerAdapter):
    """Logger adapter that prefixes every message with a run id.

    Sweep cells may train concurrently; the prefix keeps their lines apart.
    """

    def process(self, msg: Any, kwargs: MutableMapping[str, Any]) -> tuple:
        """Prefix the message with ``[<run id>]``."""
        return f"[{self.extra['run_id']}] {msg}", kwargs


def get_run_logger(run_id: str) -> RunLogger:
    """Get the application logger bound to one training run.

    Args:
        run_id: Run directory name, e.g. ``lpd2000_seed3``.

    Returns:
        RunLogger: Adapter over the singleton logger.
    """
    return RunLogger(get_logger(), {"run_id": run_id})
