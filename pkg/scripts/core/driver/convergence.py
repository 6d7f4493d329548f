"""
convergence.py - Mesh-refinement studies against exact solutions

This module handles:
- Running one problem on a sequence of meshes (optionally halving the
  CFL number with each refinement)
- L∞ errors of B and A against the exact solution at the final time
- Observed orders between successive meshes, written to convergence.csv
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from scripts.core import physics
from scripts.core.diagnostics import linf_error, observed_order
from scripts.core.driver.config import RunConfig, build_config, parse_mesh
from scripts.core.driver.runner import SimulationRunner
from scripts.core.errors import ConfigError
from scripts.core.problems import CATALOG, exact_solution, has_exact_solution
from scripts.utils.logging_helper import get_logger
from scripts.utils.paths import OUTPUT_DIR, run_label

log = get_logger()

COLUMNS = ["mesh", "cfl", "error_B", "order_B", "error_A", "order_A"]
B_COMPS = (physics.BX, physics.BY, physics.BZ)


def measure_errors(runner: SimulationRunner) -> Tuple[float, float]:
    """(L∞ error of B, L∞ error of A) of the runner's final state."""
    state = runner.final_state
    q_ex, A_ex = exact_solution(runner.problem, runner.grid, state.t)
    error_B = linf_error(state.q, q_ex, runner.grid, comps=B_COMPS)
    error_A = linf_error(state.A, A_ex, runner.grid)
    return error_B, error_A


def _orders(errors: Sequence[float], meshes: Sequence[Tuple[int, ...]]) -> List[Optional[float]]:
    out: List[Optional[float]] = [None]
    for k in range(1, len(errors)):
        ratio = meshes[k][0] / meshes[k - 1][0]
        if errors[k - 1] > 0 and errors[k] > 0 and ratio > 1:
            out.append(observed_order([errors[k - 1], errors[k]], ratio)[0])
        else:
            out.append(None)
    return out


def run_convergence(problem: str, meshes: Sequence[Tuple[int, ...]], t_final: Optional[float] = None,
                    cfl: float = 0.5, cfl_halving: bool = False, pp: Optional[bool] = None,
                    out: Optional[Path] = None, threads: int = 1) -> List[Dict]:
    """Run ``problem`` on each mesh and tabulate errors and orders.

    Args:
        problem: A catalog id with an exact solution (alfven2d, alfven3d)
        meshes: Increasingly fine meshes
        cfl_halving: Halve the CFL number at every refinement
        pp: Limiter switch (and with it the energy correction)
        out: Study directory; each mesh runs in a subdirectory

    Returns:
        One row per mesh with the columns of ``COLUMNS``

    Raises:
        ConfigError: unknown problem, no exact solution or fewer than two meshes
    """
    spec = CATALOG.get(problem)
    if spec is None or not has_exact_solution(spec):
        raise ConfigError(f"'{problem}' has no exact solution; use alfven2d or alfven3d")
    if len(meshes) < 2:
        raise ConfigError("a convergence study needs at least two meshes")
    out = Path(out) if out is not None else OUTPUT_DIR / f"{problem}_convergence"
    out.mkdir(parents=True, exist_ok=True)

    rows: List[Dict] = []
    c = cfl
    for mesh in tqdm([parse_mesh(m) for m in meshes], desc=f"{problem} convergence", unit="mesh"):
        config: RunConfig = build_config(overrides={
            "problem": problem, "mesh": mesh, "cfl": c, "t_final": t_final, "pp": pp,
            "threads": threads, "out": out / run_label(problem, mesh),
        })
        runner = SimulationRunner(config)
        runner.run(show_progress=False)
        error_B, error_A = measure_errors(runner)
        log.info("%s %s: error_B=%.4e error_A=%.4e", problem, "x".join(map(str, mesh)),
                 error_B, error_A)
        rows.append({"mesh": "x".join(map(str, config.mesh)), "cfl": c,
                     "error_B": error_B, "error_A": error_A})
        if cfl_halving:
            c *= 0.5

    dims = [tuple(int(v) for v in r["mesh"].split("x")) for r in rows]
    for key in ("B", "A"):
        for row, order in zip(rows, _orders([r[f"error_{key}"] for r in rows], dims)):
            row[f"order_{key}"] = order
    write_convergence_csv(out / "convergence.csv", rows)
    return rows


def write_convergence_csv(path: Path, rows: Sequence[Dict]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: "" if row.get(k) is None else row[k] for k in COLUMNS})
    return Path(path)
