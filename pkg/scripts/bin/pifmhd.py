#!/usr/bin/env python
"""
pifmhd.py - Run MHD problems and convergence studies.

Usage:
    python scripts/bin/pifmhd.py run --problem alfven2d --mesh 32x64
    python scripts/bin/pifmhd.py run --config config/runs/blast2d.cfg --pp off
    python scripts/bin/pifmhd.py converge --problem alfven2d --meshes 32x64,64x128,128x256
    python scripts/bin/pifmhd.py converge --problem alfven2d --meshes 32x64,64x128 \\
        --tfinal 0.01 --cfl-halving

Exit status is 1 for configuration and numerical failures and 2 when a run
aborts on negative density or pressure.
"""

import argparse
import logging
import pathlib
import sys
from typing import Dict, List, Optional

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

# Add project root to path
PROJECT_ROOT = pathlib.Path(__file__).parent.parent.parent
sys.path.append(str(PROJECT_ROOT))

from scripts.core.driver.config import build_config, load_config_file, parse_mesh
from scripts.core.driver.convergence import run_convergence
from scripts.core.driver.runner import SimulationRunner
from scripts.core.errors import PifMhdError, PositivityError
from scripts.utils.logging_helper import get_logger, set_level

log = get_logger()
console = Console()
err_console = Console(stderr=True)

EXIT_FAILURE = 1
EXIT_POSITIVITY = 2


def die(msg: str, status: int = EXIT_FAILURE) -> None:
    """Log error and exit with failure status."""
    log.error(msg)
    err_console.print(f"[bold red]❌ {msg}[/]")
    sys.exit(status)


def _switch(value: str) -> str:
    if value.lower() not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected on or off, got '{value}'")
    return value.lower()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="PIF-WENO ideal MHD with constrained transport")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one problem to its final time")
    run.add_argument("--config", type=pathlib.Path, help="Flat key = value run file")
    run.add_argument("--problem", help="Problem id (alfven2d, orszagtang, blast2d, ...)")
    run.add_argument("--mesh", help="Mesh extents, NX,NY[,NZ] or NXxNY[xNZ]")
    run.add_argument("--cfl", type=float)
    run.add_argument("--tfinal", type=float, dest="t_final")
    run.add_argument("--ct", type=_switch, help="Constrained transport on|off")
    run.add_argument("--pp", type=_switch, help="Positivity limiter (and energy correction) on|off")
    run.add_argument("--nu", type=float, help="Artificial resistivity of the 3D potential")
    run.add_argument("--gamma", type=float)
    run.add_argument("--out", type=pathlib.Path, help="Output directory")
    run.add_argument("--snapshots", type=int, help="Number of evenly spaced snapshots")
    run.add_argument("--threads", type=int)
    run.add_argument("--schlieren-k", type=float, dest="schlieren_k")
    run.add_argument("--debug", action="store_true", default=None)

    conv = sub.add_parser("converge", help="Mesh-refinement study against the exact solution")
    conv.add_argument("--problem", required=True, help="alfven2d or alfven3d")
    conv.add_argument("--meshes", required=True,
                      help="Comma-separated meshes, e.g. 32x64,64x128,128x256")
    conv.add_argument("--tfinal", type=float, dest="t_final")
    conv.add_argument("--cfl", type=float, default=0.5)
    conv.add_argument("--cfl-halving", action="store_true",
                      help="Halve the CFL number with every refinement")
    conv.add_argument("--pp", type=_switch)
    conv.add_argument("--out", type=pathlib.Path)
    conv.add_argument("--threads", type=int, default=1)
    return ap


def cmd_run(args: argparse.Namespace) -> None:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in (
        "problem", "mesh", "cfl", "t_final", "ct", "pp", "nu", "gamma", "out",
        "snapshots", "threads", "schlieren_k", "debug")}
    config = build_config(file_values, overrides)
    if config.debug:
        set_level(logging.DEBUG)

    console.print(Panel.fit(
        f"[bold cyan]{config.problem}[/] on {'x'.join(map(str, config.mesh))}\n"
        f"[yellow]cfl={config.cfl}  t_final={config.t_final}  "
        f"ct={'on' if config.ct else 'off'}  pp={'on' if config.pp else 'off'}[/]",
        border_style="green",
    ))
    try:
        summary = SimulationRunner(config, console=console).run()
    except PositivityError as e:
        die(f"run aborted: {e}", EXIT_POSITIVITY)
        return

    table = Table(title=f"{summary.problem} summary", box=box.ROUNDED)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    for name, value in (
        ("steps", summary.steps),
        ("t", f"{summary.t_final:.6g}"),
        ("min rho", f"{summary.min_rho:.6e}"),
        ("min p", f"{summary.min_p:.6e}"),
        ("max |div B|", f"{summary.max_divB:.3e}"),
        ("energy error", f"{summary.energy_error:.3e}"),
        ("wall time", f"{summary.wall_time:.1f}s"),
        ("output", str(summary.out_dir)),
    ):
        table.add_row(name, str(value))
    console.print(table)


def _fmt(value: Optional[float], spec: str) -> str:
    return "-" if value is None else format(value, spec)


def render_convergence(rows: List[Dict], title: str) -> Table:
    table = Table(title=title, box=box.ROUNDED)
    for col, style in (("mesh", "cyan"), ("cfl", None), ("error_B", "yellow"),
                       ("order_B", "green"), ("error_A", "yellow"), ("order_A", "green")):
        table.add_column(col, style=style)
    for r in rows:
        table.add_row(r["mesh"], f"{r['cfl']:.4g}", _fmt(r["error_B"], ".4e"),
                      _fmt(r["order_B"], ".2f"), _fmt(r["error_A"], ".4e"),
                      _fmt(r["order_A"], ".2f"))
    return table


def cmd_converge(args: argparse.Namespace) -> None:
    meshes = [parse_mesh(m) for m in args.meshes.split(",") if m.strip()]
    pp = None if args.pp is None else args.pp == "on"
    try:
        rows = run_convergence(args.problem, meshes, t_final=args.t_final, cfl=args.cfl,
                               cfl_halving=args.cfl_halving, pp=pp, out=args.out,
                               threads=args.threads)
    except PositivityError as e:
        die(f"convergence run aborted: {e}", EXIT_POSITIVITY)
        return
    console.print(render_convergence(rows, f"{args.problem} convergence"))


def main(argv: Optional[List[str]] = None) -> None:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cmd_run(args)
        else:
            cmd_converge(args)
    except PifMhdError as e:
        die(str(e))


if __name__ == "__main__":
    main()
