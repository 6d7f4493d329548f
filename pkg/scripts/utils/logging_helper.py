#!/usr/bin/env python
"""
logging_helper.py – one-call setup: file + stdout.

Usage:
    from scripts.utils.logging_helper import get_logger
    log = get_logger()                  # derives name from caller's file
    log.info("step %d dt=%.3e", n, dt)

The level defaults to PIFMHD_LOG_LEVEL (INFO when unset); solver sweeps log
their per-step numerics at DEBUG.
"""

from __future__ import annotations
import inspect, logging, sys, os
from pathlib import Path

DEF_FMT  = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
DEF_DATE = "%Y-%m-%d %H:%M:%S"


def _default_level() -> int:
    name = os.environ.get("PIFMHD_LOG_LEVEL", "INFO").upper()
    return getattr(logging, name, logging.INFO)


def _default_log_dir() -> Path:
    root = os.environ.get("PIFMHD_ROOT")
    if root:
        return Path(root) / "logs"
    return Path(__file__).resolve().parents[2] / "logs"


def get_logger(level: int | None = None,
               log_dir: str | Path | None = None) -> logging.Logger:
    """
    Create (or return existing) logger whose name is the caller's module
    (e.g. 'pif', 'runner'). Writes to logs/<name>.log and echoes to stdout.
    """
    # ── derive name from caller ───────────────────────────────────────────
    caller = inspect.stack()[1]
    module = inspect.getmodule(caller[0])
    if module and module.__name__ != "__main__":
        name = module.__name__.split(".")[-1]
    else:
        # called as a script: use the file-stem (e.g., pifmhd, run_campaign)
        name = os.path.splitext(os.path.basename(caller.filename))[0]

    logger = logging.getLogger(f"pifmhd.{name}")
    if logger.handlers:                 # already initialised
        return logger

    level = _default_level() if level is None else level
    logger.setLevel(level)

    log_dir = Path(log_dir) if log_dir is not None else _default_log_dir()
    log_dir.mkdir(parents=True, exist_ok=True)

    # file handler keeps everything the logger lets through
    fh = logging.FileHandler(log_dir / f"{name}.log", encoding="utf-8")
    fh.setFormatter(logging.Formatter(DEF_FMT, DEF_DATE))
    fh.setLevel(level)

    # console handler stays terse, rich owns the pretty output
    ch = logging.StreamHandler(sys.stdout)
    ch.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
    ch.setLevel(max(level, logging.INFO))

    logger.addHandler(fh)
    logger.addHandler(ch)
    logger.propagate = False
    return logger


def set_level(level: int) -> None:
    """Apply ``level`` to every pifmhd logger created so far (e.g. --debug)."""
    for name, logger in logging.root.manager.loggerDict.items():
        if name.startswith("pifmhd.") and isinstance(logger, logging.Logger):
            logger.setLevel(level)
            for h in logger.handlers:
                if isinstance(h, logging.FileHandler):
                    h.setLevel(level)
