#!/usr/bin/env python
"""
run_campaign.py - Run a batch of named simulations from a YAML file.

Each entry of ``runs:`` carries a ``name`` plus the keys of a run file
(problem, mesh, cfl, tfinal, ct, pp, ...). Runs execute in order; a
failing run is reported in the summary table and the batch continues.

Usage:
    python scripts/bin/run_campaign.py --config campaigns.yaml
    python scripts/bin/run_campaign.py --config campaigns.yaml --filter "blast|rotor"
"""

import argparse
import pathlib
import re
import sys
import time
from typing import Any, Dict, List

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, TaskProgressColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from ruamel.yaml import YAML

# Add project root to path
PROJECT_ROOT = pathlib.Path(__file__).parent.parent.parent
sys.path.append(str(PROJECT_ROOT))

from scripts.core.driver.config import build_config, normalize_keys
from scripts.core.driver.runner import SimulationRunner
from scripts.core.errors import ConfigError, PifMhdError, PositivityError
from scripts.utils.io_helpers import read_utf8
from scripts.utils.logging_helper import get_logger
from scripts.utils.paths import CAMPAIGNS

log = get_logger()
console = Console()


def load_campaign(config_path: pathlib.Path) -> List[Dict[str, Any]]:
    """Load the ``runs`` list of a campaign file."""
    data = YAML(typ="safe").load(read_utf8(pathlib.Path(config_path))) or {}
    runs = data.get("runs", [])
    for i, entry in enumerate(runs):
        if "name" not in entry:
            raise ConfigError(f"run #{i + 1} in {config_path} has no name")
    return runs


def filter_runs(runs: List[Dict[str, Any]], pattern: str) -> List[Dict[str, Any]]:
    """Keep runs whose name or problem matches ``pattern`` (case-insensitive regex)."""
    if not pattern:
        return runs
    rx = re.compile(pattern, flags=re.I)
    kept = [r for r in runs if rx.search(str(r.get("name", ""))) or rx.search(str(r.get("problem", "")))]
    if not kept:
        log.warning(f"No runs matched pattern: {pattern}")
    return kept


def execute(entry: Dict[str, Any]) -> Dict[str, Any]:
    """Run one campaign entry and return its result row."""
    name = entry["name"]
    result = {"name": name, "problem": entry.get("problem", "?"), "status": "Failed",
              "steps": "-", "min_p": "-", "max_divB": "-", "energy_error": "-", "duration": "-"}
    start = time.time()
    try:
        values = normalize_keys({k: v for k, v in entry.items() if k != "name"}, source=name)
        config = build_config(overrides=values)
        summary = SimulationRunner(config, console=console).run(show_progress=False)
        result.update(status="Completed", steps=str(summary.steps),
                      min_p=f"{summary.min_p:.3e}", max_divB=f"{summary.max_divB:.2e}",
                      energy_error=f"{summary.energy_error:.2e}")
    except PositivityError as e:
        log.error(f"Run {name} aborted: {e}")
        result["status"] = "Aborted (positivity)"
    except PifMhdError as e:
        log.error(f"Run {name} failed: {e}")
    result["duration"] = f"{time.time() - start:.1f}s"
    return result


def main() -> None:
    ap = argparse.ArgumentParser(description="Run simulations listed in a YAML campaign file")
    ap.add_argument("--config", type=pathlib.Path, default=CAMPAIGNS,
                    help="Path to the campaign YAML file")
    ap.add_argument("--filter", help="Regex on run name or problem")
    args = ap.parse_args()

    try:
        runs = filter_runs(load_campaign(args.config), args.filter)
    except (OSError, PifMhdError) as e:
        log.error(f"Cannot load campaign: {e}")
        console.print(f"[bold red]❌ Cannot load campaign:[/] {e}")
        sys.exit(1)
    if not runs:
        return

    console.print(Panel.fit(
        f"[bold cyan]pifmhd campaign[/]\n[yellow]Running {len(runs)} run(s)[/]",
        border_style="green"
    ))

    start_time = time.time()
    results = []
    columns = [TextColumn("[progress.description]{task.description}"), BarColumn(),
               TaskProgressColumn(), TimeElapsedColumn()]
    with Progress(*columns, console=console) as progress:
        task = progress.add_task("[magenta]Overall progress", total=len(runs))
        for i, entry in enumerate(runs):
            progress.update(task, description=f"[magenta]Run {i + 1}/{len(runs)}: {entry['name']}")
            results.append(execute(entry))
            progress.update(task, advance=1)

    table = Table(title=f"Campaign Summary (Total Runtime: {time.time() - start_time:.1f}s)",
                  box=box.ROUNDED)
    table.add_column("Run", style="cyan")
    table.add_column("Problem", style="yellow")
    table.add_column("Status", style="bold")
    table.add_column("Steps")
    table.add_column("min p", style="magenta")
    table.add_column("max |div B|", style="magenta")
    table.add_column("Energy error", style="magenta")
    table.add_column("Duration", style="green")
    for r in results:
        style = "[green]" if r["status"] == "Completed" else "[red]"
        table.add_row(r["name"], r["problem"], f"{style}{r['status']}[/]", r["steps"],
                      r["min_p"], r["max_divB"], r["energy_error"], r["duration"])
    console.print(table)


if __name__ == "__main__":
    main()
