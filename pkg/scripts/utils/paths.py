#!/usr/bin/env python
"""
paths.py – single source of truth for project folders.
           Import these constants everywhere.

The root is $PIFMHD_ROOT when set, otherwise the nearest parent folder
holding pyproject.toml or .git.
"""

import os
import re
from pathlib import Path

ROOT_MARKERS = ("pyproject.toml", ".git")


def _find_root() -> Path:
    env = os.environ.get("PIFMHD_ROOT")
    if env:
        return Path(env).resolve()
    here = Path(__file__).resolve()
    for folder in here.parents:
        if any((folder / marker).exists() for marker in ROOT_MARKERS):
            return folder
    raise RuntimeError("Could not determine project root. Set PIFMHD_ROOT or run from "
                       "inside the project checkout.")


ROOT        = _find_root()
OUTPUT_DIR  = ROOT / "outputs"      # one sub-folder per run
LOG_DIR     = ROOT / "logs"
CONFIG_DIR  = ROOT / "config"
RUNS_DIR    = CONFIG_DIR / "runs"   # key = value run files
CAMPAIGNS   = ROOT / "campaigns.yaml"

LOG_DIR.mkdir(parents=True, exist_ok=True)


def run_label(problem: str, mesh: tuple[int, ...]) -> str:
    """Return the directory label of a run, e.g. ``alfven2d_32x64``."""
    safe = re.sub(r'[<>:"/\\|?*@ ]', '_', problem)
    return f"{safe}_{'x'.join(str(n) for n in mesh)}"


def default_run_dir(problem: str, mesh: tuple[int, ...]) -> Path:
    """Output directory used when a run config leaves ``out`` empty."""
    return OUTPUT_DIR / run_label(problem, mesh)
