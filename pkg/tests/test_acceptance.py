"""Desk-scale reproduction runs. Deselected by default; run with ``pytest -m slow``."""

import csv
import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure the project root is on the import path so ``scripts`` can be imported
root_path = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(root_path))
sys.path.insert(0, str(root_path / "scripts"))

from scripts.core import physics
from scripts.core.diagnostics import line_slice, perp_parallel_components
from scripts.core.driver.config import build_config
from scripts.core.driver.convergence import run_convergence
from scripts.core.driver.runner import SimulationRunner
from scripts.core.errors import NonFiniteStateError, PositivityError
from scripts.core.problems import PHI

pytestmark = pytest.mark.slow

ALFVEN_2D_MESHES = ["32x64", "64x128", "128x256"]


def run_problem(tmp_path, name, **overrides):
    values = {"out": tmp_path / name}
    values.update(overrides)
    runner = SimulationRunner(build_config(overrides=values))
    summary = runner.run(show_progress=False)
    return runner, summary


def read_series(out_dir):
    with open(Path(out_dir) / "series.csv", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def assert_divergence_free(runner, summary):
    # step 0 holds the sampled initial field, which is not a discrete curl
    for row in read_series(summary.out_dir):
        if int(row["step"]) == 0:
            continue
        assert float(row["max_divB"]) <= 1e-11 * max(summary.max_B, 1.0)


# ── convergence ──────────────────────────────────────────────────────────
def test_alfven2d_orders_with_fixed_cfl(tmp_path):
    rows = run_convergence("alfven2d", ALFVEN_2D_MESHES, t_final=1.0, cfl=0.5, out=tmp_path)
    assert 3.842e-5 / 3 <= rows[0]["error_B"] <= 3 * 3.842e-5
    for coarse, fine in zip(rows, rows[1:]):
        assert fine["error_B"] < coarse["error_B"]
        assert fine["order_B"] >= 2.8
        assert fine["order_A"] >= 2.8


def test_alfven2d_spatial_order_with_cfl_halving(tmp_path):
    rows = run_convergence("alfven2d", ALFVEN_2D_MESHES, t_final=0.01, cfl=0.5,
                           cfl_halving=True, out=tmp_path)
    for row in rows[1:]:
        assert 3.7 <= row["order_B"] <= 4.3
        assert row["order_A"] >= 3.7


def test_alfven3d_fixed_cfl_error(tmp_path):
    rows = run_convergence("alfven3d", ["16x32x32", "32x64x64"], t_final=1.0, out=tmp_path)
    assert 4.784e-4 / 3 <= rows[0]["error_B"] <= 3 * 4.784e-4
    assert rows[1]["order_B"] >= 2.8


def test_alfven3d_spatial_order_with_cfl_halving(tmp_path):
    rows = run_convergence("alfven3d", ["16x32x32", "32x64x64"], t_final=0.01,
                           cfl_halving=True, out=tmp_path)
    assert 6.752e-5 / 3 <= rows[0]["error_B"] <= 3 * 6.752e-5
    assert rows[1]["order_B"] >= 3.5


# ── conservation ─────────────────────────────────────────────────────────
@pytest.mark.parametrize("problem,mesh,t_final", [
    ("alfven2d", (32, 64), 1.0),
    ("orszagtang", (96, 96), 0.5),
])
def test_energy_conserved_to_roundoff_without_limiter(tmp_path, problem, mesh, t_final):
    runner, summary = run_problem(tmp_path, problem, problem=problem, mesh=mesh,
                                  t_final=t_final, pp=False)
    assert summary.energy_error <= 1e-12
    assert_divergence_free(runner, summary)


@pytest.mark.parametrize("problem,mesh", [("rotor", (200, 200)), ("blast2d", (128, 128))])
def test_energy_error_with_limiter_is_small(tmp_path, problem, mesh):
    runner, summary = run_problem(tmp_path, problem, problem=problem, mesh=mesh)
    assert summary.pp
    assert summary.energy_error < 1e-2
    assert_divergence_free(runner, summary)


def test_orszag_tang_long_run_energy_error_with_limiter(tmp_path):
    runner, summary = run_problem(tmp_path, "ot_long", problem="orszagtang", mesh=(96, 96),
                                  t_final=30.0, pp=True)
    assert summary.t_final == pytest.approx(30.0)
    series = read_series(summary.out_dir)
    assert max(float(r["energy_error"]) for r in series) < 1e-2
    assert_divergence_free(runner, summary)


def test_blast_energy_error_decreases_under_refinement(tmp_path):
    _, coarse = run_problem(tmp_path, "coarse", problem="blast2d", mesh=(64, 64))
    _, fine = run_problem(tmp_path, "fine", problem="blast2d", mesh=(128, 128))
    assert fine.energy_error < coarse.energy_error


# ── positivity ───────────────────────────────────────────────────────────
@pytest.mark.parametrize("problem,mesh", [
    ("blast2d", (128, 128)),
    ("rotor", (200, 200)),
    ("blast3d", (75, 75, 75)),
])
def test_low_beta_problems_stay_positive_with_limiter(tmp_path, problem, mesh):
    runner, summary = run_problem(tmp_path, problem, problem=problem, mesh=mesh)
    series = read_series(summary.out_dir)
    assert min(float(r["min_rho"]) for r in series) > runner.floors.eps_rho
    assert min(float(r["min_p"]) for r in series) > runner.floors.eps_p
    assert summary.t_final == pytest.approx(runner.config.t_final)
    assert_divergence_free(runner, summary)


def test_blast_without_limiter_aborts_in_first_step(tmp_path):
    with pytest.raises(PositivityError) as info:
        run_problem(tmp_path, "blast", problem="blast2d", mesh=(128, 128), pp=False)
    assert info.value.step == 1
    assert min(info.value.rho, info.value.pressure) <= 0


# ── constrained transport ────────────────────────────────────────────────
def test_orszag_tang_needs_constrained_transport(tmp_path):
    with pytest.raises((PositivityError, NonFiniteStateError)) as info:
        run_problem(tmp_path, "ct_off", problem="orszagtang", mesh=(96, 96), t_final=2.5,
                    ct=False)
    if isinstance(info.value, PositivityError):
        assert info.value.time < 2.5


def test_orszag_tang_with_constrained_transport_reaches_t3(tmp_path):
    runner, summary = run_problem(tmp_path, "ct_on", problem="orszagtang", mesh=(96, 96),
                                  t_final=3.0)
    assert summary.t_final == pytest.approx(3.0)
    assert summary.min_p > 0
    rho = runner.final_state.q[physics.RHO][runner.grid.interior]
    # initial density is γ² ≈ 2.78; compressions stay bounded
    assert np.max(rho) < 20.0
    assert_divergence_free(runner, summary)


def test_shock_tube_oscillations_reduced_by_constrained_transport(tmp_path):
    deviation = {}
    for ct in (True, False):
        runner, _ = run_problem(tmp_path, f"ct_{ct}", problem="shocktube2d", mesh=(180, 150),
                                t_final=0.3, ct=ct)
        q = runner.final_state.q
        B_perp, _ = perp_parallel_components(q[physics.MAG], PHI)
        _, values = line_slice(B_perp, runner.grid, 0, [0.0])
        deviation[ct] = float(np.max(np.abs(values - 0.75)))
    assert deviation[True] <= 0.5 * deviation[False]


# ── smoke tests for the large runs ───────────────────────────────────────
def test_cloud_shock_front_moves_right(tmp_path):
    runner, summary = run_problem(tmp_path, "cloud", problem="cloudshock2d", mesh=(128, 128))
    assert summary.min_p > 0
    assert_divergence_free(runner, summary)
    # below the cloud the incident shock is the only density jump
    xs, rho = line_slice(runner.final_state.q[physics.RHO], runner.grid, 0, [0.1])
    shocked = xs[rho > 2.0]
    assert shocked.size and shocked.max() > 0.05 + 0.05
