import csv
import json
import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure the project root is on the import path so ``scripts`` can be imported
root_path = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(root_path))
sys.path.insert(0, str(root_path / "scripts"))

from scripts.core import physics
from scripts.core.diagnostics import linf_error
from scripts.core.driver.config import (build_config, load_config_file, normalize_keys,
                                        parse_mesh, parse_switch)
from scripts.core.driver.convergence import run_convergence
from scripts.core.driver.output import (component_names, read_snapshot, write_csv_slice,
                                        write_snapshot)
from scripts.core.driver.runner import SimulationRunner, State, step
from scripts.core.errors import ConfigError, PositivityError
from scripts.core.problems import exact_solution, get_problem, initial_state, problem_grid
from scripts.utils.paths import RUNS_DIR


def quick(tmp_path, **overrides):
    values = {"out": tmp_path / "run"}
    values.update(overrides)
    return build_config(overrides=values)


# ── configuration ────────────────────────────────────────────────────────
@pytest.mark.parametrize("text,expected", [
    ("32x64", (32, 64)),
    ("32,64", (32, 64)),
    (" 16X16x8 ", (16, 16, 8)),
    ([8, 8], (8, 8)),
])
def test_parse_mesh_forms(text, expected):
    assert parse_mesh(text) == expected


def test_parse_mesh_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_mesh("32xabc")


@pytest.mark.parametrize("value,expected", [
    ("on", True), ("OFF", False), ("yes", True), ("0", False), (True, True),
])
def test_parse_switch(value, expected):
    assert parse_switch(value) is expected


def test_parse_switch_rejects_unknown():
    with pytest.raises(ConfigError):
        parse_switch("maybe")


def test_defaults_come_from_the_catalog(tmp_path):
    cfg = quick(tmp_path, problem="blast2d")
    problem = get_problem("blast2d")
    assert cfg.mesh == problem.default_mesh
    assert cfg.t_final == problem.t_final
    assert cfg.pp is True and cfg.energy_correction
    assert cfg.ct is True
    assert cfg.cfl == 0.5 and cfg.nu == 0.01

    cfg = quick(tmp_path, problem="alfven2d")
    assert cfg.pp is False and not cfg.energy_correction
    assert cfg.gamma == pytest.approx(5.0 / 3.0)


def test_default_output_directory_is_labelled():
    cfg = build_config(overrides={"problem": "orszagtang", "mesh": "24x24"})
    assert cfg.out.name == "orszagtang_24x24"


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# a comment\nproblem = orszagtang\nmesh = 48x48\ntfinal = 0.5\n"
                    "ct = off\nsnapshots = 2\n", encoding="utf-8")
    values = load_config_file(path)
    assert values["t_final"] == "0.5"
    cfg = build_config(values, {"mesh": "24x24", "cfl": None, "out": tmp_path})
    assert cfg.mesh == (24, 24)
    assert cfg.t_final == 0.5
    assert cfg.ct is False
    assert cfg.snapshots == 2
    assert cfg.cfl == 0.5


def test_config_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("problem = rotor\nresolution = 64\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="resolution"):
        load_config_file(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "absent.cfg")


def test_normalize_keys_accepts_dashes_and_skips_blanks():
    assert normalize_keys({"Schlieren-K": "10", "nu": ""}) == {"schlieren_k": "10"}


@pytest.mark.parametrize("overrides", [
    {},
    {"problem": "kelvin"},
    {"problem": "alfven2d", "mesh": "8x8x8"},
    {"problem": "alfven2d", "cfl": 0.0},
    {"problem": "alfven2d", "cfl": 1.5},
    {"problem": "alfven2d", "threads": 0},
    {"problem": "alfven2d", "nu": -1.0},
    {"problem": "alfven2d", "t_final": -0.1},
    {"problem": "alfven2d", "pp": "sometimes"},
])
def test_invalid_settings_raise_config_error(overrides):
    with pytest.raises(ConfigError):
        build_config(overrides=overrides)


@pytest.mark.parametrize("path", sorted(RUNS_DIR.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_run_files_validate(path):
    cfg = build_config(load_config_file(path))
    assert cfg.problem_spec.dim == len(cfg.mesh)


# ── snapshots ────────────────────────────────────────────────────────────
def test_snapshot_header_and_payload(tmp_path):
    problem = get_problem("orszagtang")
    spec = problem_grid(problem, (8, 6))
    q, A = initial_state(problem, spec)
    path = write_snapshot(tmp_path / "s.bin", problem.id, 0.25, spec, q, A)
    snap = read_snapshot(path)
    assert snap["problem"] == "orszagtang"
    assert snap["t"] == 0.25
    assert snap["dims"] == (8, 6)
    assert snap["bounds"] == spec.bounds
    assert snap["components"] == component_names(2)
    assert snap["components"][-1] == "Az"
    assert snap["data"].shape == (9, 8, 6)
    assert np.array_equal(snap["data"][:8], q[spec.cinterior])
    assert np.array_equal(snap["data"][8], A[0][spec.interior])


def test_snapshot_payload_is_cell_major(tmp_path):
    problem = get_problem("orszagtang")
    spec = problem_grid(problem, (4, 4))
    q, _ = initial_state(problem, spec)
    path = write_snapshot(tmp_path / "s.bin", problem.id, 0.0, spec, q)
    raw = path.read_bytes()
    body = raw[raw.index(b"end_header\n") + len(b"end_header\n"):]
    first_cell = np.frombuffer(body[:8 * 8], dtype="<f8")
    g = spec.ghost
    assert np.array_equal(first_cell, q[:, g, g])


def test_read_snapshot_rejects_foreign_file(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"something else\nend_header\n")
    with pytest.raises(ValueError):
        read_snapshot(path)


def test_csv_slice_rows(tmp_path):
    spec = problem_grid(get_problem("blast3d"), (6, 5, 4))
    values = np.arange(np.prod(spec.shape), dtype=float).reshape(spec.shape)
    path = write_csv_slice(tmp_path / "slice.csv", spec, values, "density")
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["x", "y", "density"]
    assert len(rows) == 1 + 6 * 5


# ── stepping and full runs ───────────────────────────────────────────────
def test_zero_final_time_returns_initial_state(tmp_path):
    cfg = quick(tmp_path, problem="orszagtang", mesh="16x16", t_final=0.0)
    runner = SimulationRunner(cfg)
    summary = runner.run(show_progress=False)
    assert summary.steps == 0
    spec = runner.grid
    q0, _ = initial_state(runner.problem, spec)
    snap = read_snapshot(cfg.out / "snap_0001.bin")
    assert np.array_equal(snap["data"][:8], q0[spec.cinterior])


def test_short_orszag_tang_run_writes_outputs(tmp_path):
    cfg = quick(tmp_path, problem="orszagtang", mesh="16x16", t_final=0.05, snapshots=2)
    runner = SimulationRunner(cfg)
    summary = runner.run(show_progress=False)
    out = cfg.out
    assert summary.steps > 0
    assert summary.t_final == pytest.approx(0.05, abs=1e-14)
    for name in ("snap_0000.bin", "snap_0001.bin", "snap_0002.bin", "series.csv",
                 "summary.json", "snap_0002_density.csv", "snap_0002_schlieren.csv",
                 "snap_0002_density.dat"):
        assert (out / name).exists(), name
    assert read_snapshot(out / "snap_0001.bin")["t"] == pytest.approx(0.025, abs=1e-14)

    data = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert data["problem"] == "orszagtang"
    assert data["steps"] == summary.steps
    with open(out / "series.csv", newline="", encoding="utf-8") as f:
        series = list(csv.DictReader(f))
    assert len(series) == summary.steps + 1
    assert float(series[0]["t"]) == 0.0

    # constrained transport keeps the discrete divergence at round-off
    assert summary.max_divB <= 1e-10 * summary.max_B
    # flux-form update with no energy correction conserves total energy
    assert summary.energy_error < 1e-12
    assert summary.min_rho > 0 and summary.min_p > 0


def test_step_advances_time_and_respects_stop(tmp_path):
    cfg = quick(tmp_path, problem="orszagtang", mesh="16x16")
    runner = SimulationRunner(cfg)
    state = runner.initial()
    new = step(state, cfg)
    assert new.t > 0 and new.step == 1
    capped = step(state, cfg, t_stop=1e-5)
    assert capped.t == pytest.approx(1e-5)
    assert isinstance(capped, State)
    # the input state is not modified
    assert state.t == 0.0


def test_curl_replaces_field_only_with_ct(tmp_path):
    with_ct = quick(tmp_path, problem="orszagtang", mesh="16x16", ct="on")
    without = quick(tmp_path, problem="orszagtang", mesh="16x16", ct="off")
    r_ct, r_no = SimulationRunner(with_ct), SimulationRunner(without)
    s0 = r_ct.initial()
    a, rep_a = r_ct.advance(s0)
    b, rep_b = r_no.advance(r_no.initial())
    assert np.allclose(b.A, s0.A, rtol=0, atol=1e-13)
    assert not np.allclose(a.A, s0.A, rtol=0, atol=1e-8)
    assert rep_a.dt == pytest.approx(rep_b.dt)
    assert rep_a.max_divB <= 1e-10 * rep_a.max_B


def test_short_alfven_run_tracks_exact_solution(tmp_path):
    cfg = quick(tmp_path, problem="alfven2d", mesh="32x64", t_final=0.02)
    runner = SimulationRunner(cfg)
    runner.run(show_progress=False)
    state = runner.final_state
    q_ex, _ = exact_solution(runner.problem, runner.grid, state.t)
    err = linf_error(state.q, q_ex, runner.grid, comps=[physics.BX, physics.BY, physics.BZ])
    assert err < 1e-4


def test_blast_without_limiter_aborts(tmp_path):
    cfg = quick(tmp_path, problem="blast2d", mesh="32x32", pp="off", t_final=0.002)
    with pytest.raises(PositivityError) as info:
        SimulationRunner(cfg).run(show_progress=False)
    assert info.value.step is not None and info.value.step >= 1
    assert info.value.cell is not None
    # the series up to the failure is still written
    assert (cfg.out / "series.csv").exists()


def test_blast_with_limiter_stays_positive(tmp_path):
    cfg = quick(tmp_path, problem="blast2d", mesh="24x24", t_final=2e-4)
    summary = SimulationRunner(cfg).run(show_progress=False)
    assert summary.pp
    assert summary.min_rho > 0 and summary.min_p > 0



def positive_state_with_pressure(runner, p):
    q, A = initial_state(runner.problem, runner.grid)
    w = physics.to_primitive(q, runner.gamma)
    w[physics.ENER] = p
    return physics.to_conserved(w, runner.gamma), A


def test_limited_run_checks_against_the_floors(tmp_path):
    limited = SimulationRunner(quick(tmp_path, problem="blast2d", mesh="16x16", eps_p=1e-6))
    plain = SimulationRunner(quick(tmp_path, problem="blast2d", mesh="16x16", pp="off", eps_p=1e-6))
    q, A = positive_state_with_pressure(limited, 1e-8)
    plain._check(q, A)
    with pytest.raises(PositivityError) as info:
        limited._check(q, A)
    assert "pressure" in str(info.value)
    q_ok, _ = positive_state_with_pressure(limited, 2e-6)
    limited._check(q_ok, A)


# ── convergence ──────────────────────────────────────────────────────────
def test_convergence_study_rows_and_orders(tmp_path):
    rows = run_convergence("alfven2d", ["16x32", "32x64"], t_final=0.02, out=tmp_path)
    assert [r["mesh"] for r in rows] == ["16x32", "32x64"]
    assert rows[0]["order_B"] is None
    assert rows[1]["error_B"] < rows[0]["error_B"]
    assert rows[1]["order_B"] > 2.0
    assert (tmp_path / "convergence.csv").exists()
    assert (tmp_path / "alfven2d_32x64" / "summary.json").exists()


def test_convergence_cfl_halving(tmp_path):
    rows = run_convergence("alfven2d", [(8, 16), (16, 32)], t_final=0.01, cfl=0.4,
                           cfl_halving=True, out=tmp_path)
    assert [r["cfl"] for r in rows] == [0.4, 0.2]


@pytest.mark.parametrize("problem,meshes", [
    ("orszagtang", ["8x8", "16x16"]),
    ("alfven2d", ["8x16"]),
    ("nowhere", ["8x8", "16x16"]),
])
def test_convergence_rejects_bad_requests(tmp_path, problem, meshes):
    with pytest.raises(ConfigError):
        run_convergence(problem, meshes, out=tmp_path)


# ── command line ─────────────────────────────────────────────────────────
def test_cli_run_succeeds(tmp_path):
    from bin.pifmhd import main
    main(["run", "--problem", "orszagtang", "--mesh", "16x16", "--tfinal", "0.01",
          "--out", str(tmp_path / "cli")])
    assert (tmp_path / "cli" / "summary.json").exists()


def test_cli_run_with_config_file(tmp_path):
    from bin.pifmhd import main
    path = tmp_path / "ot.cfg"
    path.write_text("problem = orszagtang\nmesh = 64x64\ntfinal = 1.0\n", encoding="utf-8")
    main(["run", "--config", str(path), "--mesh", "12x12", "--tfinal", "0.0",
          "--out", str(tmp_path / "cfg")])
    summary = json.loads((tmp_path / "cfg" / "summary.json").read_text(encoding="utf-8"))
    assert summary["mesh"] == [12, 12]
    assert summary["steps"] == 0


@pytest.mark.parametrize("argv,status", [
    (["run", "--problem", "nowhere"], 1),
    (["run", "--mesh", "8x8"], 1),
    (["converge", "--problem", "orszagtang", "--meshes", "8x8,16x16"], 1),
    (["run", "--problem", "blast2d", "--mesh", "32x32", "--pp", "off", "--tfinal", "0.002"], 2),
])
def test_cli_exit_codes(tmp_path, argv, status):
    from bin.pifmhd import main
    with pytest.raises(SystemExit) as info:
        main(argv + (["--out", str(tmp_path / "x")] if argv[0] == "run" else []))
    assert info.value.code == status


def test_cli_rejects_bad_switch():
    from bin.pifmhd import build_parser
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--problem", "rotor", "--ct", "maybe"])
