"""Console and per-run logging for ooskge commands.

Every command writes its progress to stderr and, when it has an output
directory, to ``<out>/run.log`` with timestamps so long training runs can be
followed after the fact.
"""

from __future__ import annotations

import logging
from pathlib import Path

_LOGGER_NAME = "ooskge"
RUN_LOG_NAME = "run.log"
CONSOLE_FORMAT = "[ooskge] %(levelname)s %(message)s"
RUN_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(name: str | None = None) -> logging.Logger:
    """Return a module-scoped logger under the ooskge hierarchy."""
    full_name = f"{_LOGGER_NAME}.{name}" if name else _LOGGER_NAME
    return logging.getLogger(full_name)


def run_log_path(run_dir: Path) -> Path:
    return Path(run_dir) / RUN_LOG_NAME


def release_handlers() -> None:
    """Detach and close every handler on the ooskge logger."""
    logger = logging.getLogger(_LOGGER_NAME)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


def configure_logging(*, verbose: bool = False, run_dir: Path | None = None) -> logging.Logger:
    """Route ooskge records to the console and, given ``run_dir``, to its run log.

    Handlers from an earlier call are released first, so one process can run
    several commands against different output directories.
    """
    level = logging.DEBUG if verbose else logging.INFO
    logger = logging.getLogger(_LOGGER_NAME)
    logger.setLevel(level)
    logger.propagate = False
    release_handlers()

    console = logging.StreamHandler()
    console.setLevel(level)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    logger.addHandler(console)

    if run_dir is not None:
        path = run_log_path(run_dir)
        path.parent.mkdir(parents=True, exist_ok=True)
        sink = logging.FileHandler(path, encoding="utf-8")
        sink.setLevel(level)
        sink.setFormatter(logging.Formatter(RUN_LOG_FORMAT))
        logger.addHandler(sink)
        logger.debug("Appending run log to %s", path)

    return logger


__all__ = [
    "RUN_LOG_NAME",
    "configure_logging",
    "get_logger",
    "release_handlers",
    "run_log_path",
]
