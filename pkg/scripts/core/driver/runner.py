"""
runner.py - The constrained-transport time loop

This module contains the SimulationRunner class, which advances one
problem from its initial condition to t_final. Each step:

1. fills the ghost cells of q and A
2. picks Δt from the global signal speeds
3. (pp on) builds the Lax-Friedrichs fluxes and q_LF
4. builds Taylor time-averaged fluxes and reconstructs them with WENO
5. (pp on) blends high- and low-order fluxes with the θ limiter
6. applies the conservative update
7. (ct on) advances A, replaces B by curl A and, with pp on, corrects
   the energy so the pressure is unchanged

The module-level ``step`` and ``run`` wrap the class for callers that
only need one call.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from rich.console import Console
from rich.progress import BarColumn, Progress, TextColumn, TimeElapsedColumn

from scripts.core import physics
from scripts.core.ct import ResistivityParams, curl_B, energy_correction, potential_taylor_step
from scripts.core.diagnostics import (energy_conservation_error, extrema, max_divergence,
                                      shock_front_position)
from scripts.core.driver.config import RunConfig
from scripts.core.driver.output import export_snapshot, write_series, write_summary
from scripts.core.errors import NonFiniteStateError, PositivityError
from scripts.core.limiter import PositivityFloors, lf_update, limit_fluxes
from scripts.core.mesh import GridSpec, fill_ghosts
from scripts.core.pif import compute_dt, conservative_update, global_alphas, time_avg_fluxes
from scripts.core.problems import initial_state, potential_jumps, problem_grid
from scripts.core.weno import reconstruct_interface
from scripts.utils.logging_helper import get_logger

log = get_logger()
console = Console()

# relative roundoff allowed below the limiter floors
FLOOR_SLACK = 1e-9


@dataclass
class State:
    """Solution at one instant; q and A are ghosted, component-major."""

    q: np.ndarray
    A: np.ndarray
    t: float = 0.0
    step: int = 0


class StepReport(NamedTuple):
    dt: float
    limited_faces: int
    min_theta: float
    max_divB: float
    max_B: float


class RunSummary(BaseModel):
    problem: str
    mesh: Tuple[int, ...]
    cfl: float
    ct: bool
    pp: bool
    steps: int
    t_final: float
    min_rho: float
    min_p: float
    max_divB: float
    max_B: float
    energy_error: float
    wall_time: float
    out_dir: Path


class SimulationRunner:
    """Runs one configured simulation.

    Args:
        config: Validated run configuration
        console: Where the progress bar goes (module console by default)
    """

    def __init__(self, config: RunConfig, console: Console = console):
        self.config = config
        self.console = console
        self.problem = config.problem_spec
        self.grid: GridSpec = problem_grid(self.problem, config.mesh)
        self.gamma = float(config.gamma)
        self.floors = PositivityFloors(eps_rho=config.eps_rho, eps_p=config.eps_p)
        self.resistivity = ResistivityParams(nu=config.nu)
        self.periodic = [self.problem.periodic] * self.grid.ndim
        self.jumps = potential_jumps(self.problem, self.grid)
        self.rows: List[Dict] = []
        self._E0: Optional[np.ndarray] = None
        self.final_state: Optional[State] = None

    # ── state handling ───────────────────────────────────────────────────
    def initial(self) -> State:
        q, A = initial_state(self.problem, self.grid)
        self._E0 = q[physics.ENER].copy()
        return State(q=q, A=A)

    def fill(self, state: State) -> State:
        """Copy of ``state`` with every ghost layer refreshed."""
        q = fill_ghosts(state.q.copy(), self.grid, self.problem.q_boundary)
        A = fill_ghosts(state.A.copy(), self.grid, self.problem.a_boundary, self.jumps)
        return replace(state, q=q, A=A)

    def divergence(self, q: np.ndarray) -> Tuple[float, float]:
        """(max |div B|, max |B|); B's ghosts are refreshed unless they came from curl A."""
        if not self.config.ct:
            q = fill_ghosts(q.copy(), self.grid, self.problem.q_boundary)
        return max_divergence(q[physics.MAG], self.grid)

    def _check(self, q: np.ndarray, A: np.ndarray) -> None:
        inner = q[self.grid.cinterior]
        if not (np.all(np.isfinite(inner)) and np.all(np.isfinite(A[self.grid.cinterior]))):
            bad = np.argwhere(~np.isfinite(inner).all(axis=0))
            cell = tuple(int(i) for i in bad[0]) if len(bad) else None
            log.error("non-finite state at cell %s", cell)
            raise NonFiniteStateError(f"non-finite values in the updated state (cell {cell})")
        rho = inner[physics.RHO]
        with np.errstate(divide="ignore", invalid="ignore"):
            p = physics.raw_pressure(inner, self.gamma)
        # the limited update guarantees the floors, the plain one only positivity
        if self.config.pp:
            rho_min = self.floors.eps_rho * (1.0 - FLOOR_SLACK)
            p_min = self.floors.eps_p * (1.0 - FLOOR_SLACK)
            rho_ok, p_ok = rho >= rho_min, p >= p_min
        else:
            rho_min = p_min = 0.0
            rho_ok, p_ok = rho > 0.0, p > 0.0
        bad = ~(rho_ok & p_ok)
        if bad.any():
            cell = tuple(int(i) for i in np.argwhere(bad)[0])
            what, floor = ("density", rho_min) if not rho_ok[cell] else ("pressure", p_min)
            log.error("%s at or below %.1e at cell %s (rho=%.3e, p=%.3e)", what, floor, cell,
                      rho[cell], p[cell])
            raise PositivityError(f"{what} below its floor after update", cell=cell,
                                  rho=float(rho[cell]), pressure=float(p[cell]))

    # ── one step ─────────────────────────────────────────────────────────
    def advance(self, state: State, t_stop: Optional[float] = None) -> Tuple[State, StepReport]:
        """Advance ``state`` by one step, never past ``t_stop``.

        Raises:
            PositivityError: non-positive density or pressure (limiter off),
                or either one below its floor (limiter on)
            NonFiniteStateError: NaN or Inf in the new state
        """
        cfg, grid, gamma = self.config, self.grid, self.gamma
        filled = self.fill(state)
        q, A = filled.q, filled.A

        alphas = global_alphas(q, grid, gamma)
        dt = compute_dt(q, grid, cfg.cfl, gamma, alphas)
        t_new = state.t + dt
        if t_stop is not None and t_new >= t_stop:
            dt, t_new = t_stop - state.t, t_stop
        log.debug("step %d: dt=%.6e alphas=%s", state.step + 1, dt,
                  ", ".join(f"{a:.4g}" for a in alphas))

        if cfg.pp:
            q_lf, f_low = lf_update(q, grid, dt, alphas, self.floors, gamma)

        taylor = time_avg_fluxes(q, grid, dt, gamma, self.problem.q_boundary)
        fluxes = [reconstruct_interface(taylor.fluxes[d], q, grid, d, alphas[d], gamma,
                                        threads=cfg.threads)
                  for d in range(grid.ndim)]

        limited_faces, min_theta = 0, 1.0
        if cfg.pp:
            fluxes, thetas = limit_fluxes(q_lf, fluxes, f_low, grid, dt, self.periodic,
                                          self.floors, gamma, threads=cfg.threads)
            limited_faces = int(sum(np.count_nonzero(th < 1.0) for th in thetas))
            min_theta = float(min(np.min(th) for th in thetas))
            if limited_faces:
                log.debug("limiter active on %d interfaces (min theta %.4f)",
                          limited_faces, min_theta)

        q_new = conservative_update(q, fluxes, grid, dt)
        A_new = A
        if cfg.ct:
            A_new = potential_taylor_step(A, q, taylor.q_t, taylor.q_tt, grid, dt,
                                          res=self.resistivity)
            fill_ghosts(A_new, grid, self.problem.a_boundary, self.jumps)
            B_star = q_new[physics.MAG].copy()
            B_curl = curl_B(A_new, grid)
            q_new[physics.BX:physics.BX + len(B_curl)] = B_curl
            if cfg.energy_correction:
                q_new[physics.ENER] = energy_correction(q_new[physics.ENER], B_star,
                                                          q_new[physics.MAG])

        self._check(q_new, A_new)
        max_divB, max_B = self.divergence(q_new)
        new = State(q=q_new, A=A_new, t=t_new, step=state.step + 1)
        return new, StepReport(dt, limited_faces, min_theta, max_divB, max_B)

    # ── diagnostics ──────────────────────────────────────────────────────
    def record(self, state: State, report: Optional[StepReport]) -> Dict:
        min_rho, min_p = extrema(state.q, self.grid, self.gamma)
        if report is None:
            max_divB, _ = self.divergence(state.q)
        else:
            max_divB = report.max_divB
        row = {
            "step": state.step,
            "t": state.t,
            "dt": None if report is None else report.dt,
            "energy_error": energy_conservation_error(state.q[physics.ENER], self._E0, self.grid),
            "max_divB": max_divB,
            "min_rho": min_rho,
            "min_p": min_p,
            "limited_faces": 0 if report is None else report.limited_faces,
            "min_theta": 1.0 if report is None else report.min_theta,
            "shock_front_x": None if self.problem.periodic
            else shock_front_position(state.q, self.grid),
        }
        self.rows.append(row)
        return row

    def output_times(self) -> List[float]:
        n, tf = self.config.snapshots, float(self.config.t_final)
        if n == 0:
            return [tf]
        return [tf * k / n for k in range(1, n + 1)]

    def _snapshot(self, index: int, state: State) -> None:
        export_snapshot(Path(self.config.out), index, self.problem.id, state.t, self.grid,
                        state.q, state.A, self.gamma, self.config.schlieren_k)

    # ── full run ─────────────────────────────────────────────────────────
    def run(self, show_progress: bool = True) -> RunSummary:
        """Advance to t_final, writing snapshots, the series and summary.json.

        Returns:
            RunSummary of the final state

        Raises:
            PositivityError: located with the time and step of the failing step
            NonFiniteStateError: NaN or Inf after a step
        """
        cfg = self.config
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        log.info("running %s on %s (cfl=%.3g, ct=%s, pp=%s) -> %s", self.problem.id,
                 "x".join(map(str, self.grid.dims)), cfg.cfl, cfg.ct, cfg.pp, out_dir)
        started = time.time()

        state = self.initial()
        self.record(state, None)
        self._snapshot(0, state)
        report: Optional[StepReport] = None

        progress = Progress(TextColumn("[bold blue]{task.description}"), BarColumn(),
                            TextColumn("t={task.completed:.4g}/{task.total:.4g}"),
                            TimeElapsedColumn(), console=self.console,
                            disable=not show_progress, transient=True)
        try:
            with progress:
                task = progress.add_task(self.problem.id, total=float(cfg.t_final) or 1.0)
                for index, target in enumerate(self.output_times(), start=1):
                    while state.t < target:
                        try:
                            state, report = self.advance(state, t_stop=target)
                        except PositivityError as e:
                            raise e.located(state.t, state.step + 1) from e
                        self.record(state, report)
                        progress.update(task, completed=state.t)
                    if cfg.snapshots or index == 1:
                        self._snapshot(index, state)
        finally:
            write_series(out_dir / "series.csv", self.rows)

        last = self.rows[-1]
        max_B = report.max_B if report is not None else self.divergence(state.q)[1]
        summary = RunSummary(
            problem=self.problem.id,
            mesh=self.grid.dims,
            cfl=cfg.cfl,
            ct=cfg.ct,
            pp=bool(cfg.pp),
            steps=state.step,
            t_final=state.t,
            min_rho=last["min_rho"],
            min_p=last["min_p"],
            max_divB=last["max_divB"],
            max_B=max_B,
            energy_error=last["energy_error"],
            wall_time=time.time() - started,
            out_dir=out_dir,
        )
        write_summary(out_dir / "summary.json", summary)
        log.info("%s finished: %d steps, t=%.6g, min rho=%.3e, min p=%.3e, max|divB|=%.2e",
                 self.problem.id, summary.steps, summary.t_final, summary.min_rho,
                 summary.min_p, summary.max_divB)
        self.final_state = state
        return summary


def step(state: State, config: RunConfig, t_stop: Optional[float] = None) -> State:
    """One update of ``state`` under ``config``."""
    runner = SimulationRunner(config)
    new, _ = runner.advance(state, t_stop)
    return new


def run(config: RunConfig, show_progress: bool = True) -> RunSummary:
    return SimulationRunner(config).run(show_progress=show_progress)
