import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure the project root is on the import path so ``scripts`` can be imported
root_path = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(root_path))
sys.path.insert(0, str(root_path / "scripts"))

from scripts.core import physics
from scripts.core.ct import curl_B
from scripts.core.diagnostics import (discrete_divergence, energy_conservation_error, extrema,
                                      line_slice, linf_error, max_divergence, observed_order,
                                      perp_parallel_components, schlieren, shock_front_position,
                                      summarize_orders, total)
from scripts.core.errors import InvalidGridError
from scripts.core.mesh import build_grid, fill_ghosts
from scripts.core.pif import conservative_update


@pytest.fixture()
def grid():
    return build_grid((16, 12), [(0.0, 1.0), (0.0, 1.0)])


# ── errors and orders ────────────────────────────────────────────────────
def test_linf_error_identical_fields():
    a = np.random.default_rng(0).normal(size=(8, 5, 5))
    assert linf_error(a, a.copy()) == 0.0


def test_linf_error_single_cell_difference(grid):
    a = np.zeros((8,) + grid.shape)
    b = a.copy()
    g = grid.ghost
    b[3, g + 2, g + 4] = 0.25
    b[3, 0, 0] = 10.0  # ghost cells are ignored with a grid
    assert linf_error(a, b, grid) == pytest.approx(0.25)
    assert linf_error(a, b, grid, comps=[0, 1]) == 0.0
    assert linf_error(a, b) == pytest.approx(10.0)


def test_linf_error_shape_mismatch():
    with pytest.raises(InvalidGridError):
        linf_error(np.zeros((2, 3)), np.zeros((3, 2)))


def test_observed_order_examples():
    assert observed_order([4e-5, 5e-6]) == [pytest.approx(3.0)]
    assert observed_order([3.842e-5, 4.940e-6])[0] == pytest.approx(2.96, abs=0.01)
    assert observed_order([1e-3, 1e-3, 1e-3]) == [0.0, 0.0]
    assert observed_order([9e-4, 1e-4], ratio=3.0)[0] == pytest.approx(2.0)


@pytest.mark.parametrize("errors", [[1e-3], [1e-3, 0.0], [-1.0, 1.0]])
def test_observed_order_rejects_bad_input(errors):
    with pytest.raises(ValueError):
        observed_order(errors)


def test_summarize_orders_aligns_with_rows():
    rows = [{"error_B": 4e-5}, {"error_B": 5e-6}, {"error_B": 6.25e-7}]
    orders = summarize_orders(rows, "error_B")
    assert orders[0] is None
    assert orders[1:] == [pytest.approx(3.0), pytest.approx(3.0)]
    assert summarize_orders(rows[:1], "error_B") == [None]


# ── energy ───────────────────────────────────────────────────────────────
def test_energy_error_zero_for_identical_fields(grid):
    E = np.random.default_rng(1).uniform(1.0, 2.0, grid.shape)
    assert energy_conservation_error(E, E.copy(), grid) == 0.0


def test_energy_error_relative_value():
    E0 = np.ones((4, 4))
    E1 = E0.copy()
    E1[0, 0] += 0.16
    assert energy_conservation_error(E1, E0) == pytest.approx(0.01)


def test_energy_error_needs_nonzero_total():
    with pytest.raises(ValueError):
        energy_conservation_error(np.ones(3), np.zeros(3))


def test_flux_form_update_conserves_energy_to_roundoff(grid):
    rng = np.random.default_rng(2)
    q = np.zeros((8,) + grid.shape)
    q[physics.ENER] = rng.uniform(1.0, 2.0, grid.shape)
    fill_ghosts(q, grid, "periodic")
    # periodic interface fluxes: first and last faces carry the same value
    F = [rng.normal(size=(8, 17, 12)), rng.normal(size=(8, 16, 13))]
    F[0][:, -1] = F[0][:, 0]
    F[1][:, :, -1] = F[1][:, :, 0]
    new = conservative_update(q, F, grid, 1e-3)
    assert energy_conservation_error(new[physics.ENER], q[physics.ENER], grid) < 1e-14


def test_total_uses_interior_only(grid):
    v = np.ones(grid.shape)
    assert total(v, grid) == 16 * 12
    assert total(v) == float(v.size)


# ── divergence ───────────────────────────────────────────────────────────
def test_uniform_field_has_no_divergence(grid):
    B = np.empty((3,) + grid.shape)
    B[0], B[1], B[2] = 0.3, -1.2, 0.4
    div = discrete_divergence(B, grid)
    assert div.shape == grid.dims
    assert np.allclose(div, 0.0, atol=1e-13)
    max_div, max_b = max_divergence(B, grid)
    assert max_div < 1e-13
    assert max_b == pytest.approx(math.sqrt(0.09 + 1.44 + 0.16))


def test_curl_field_is_divergence_free(grid):
    A = np.random.default_rng(3).normal(size=(1,) + grid.shape)
    B = curl_B(A, grid)
    max_div, max_b = max_divergence(B, grid)
    assert max_div <= 1e-12 * max_b


def test_divergent_field_is_detected(grid):
    X, _ = grid.coordinates()
    B = np.zeros((3,) + grid.shape)
    B[0] = X
    assert np.allclose(discrete_divergence(B, grid), 1.0)


# ── monitors ─────────────────────────────────────────────────────────────
def test_extrema_reports_minimum_density_and_pressure(grid):
    w = np.zeros((8,) + grid.shape)
    w[physics.RHO] = 1.0
    w[physics.ENER] = 2.0
    g = grid.ghost
    w[physics.RHO, g + 3, g + 3] = 0.25
    w[physics.ENER, g + 5, g + 1] = 0.5
    w[physics.RHO, 0, 0] = -1.0  # ghost
    q = physics.to_conserved(w)
    rho_min, p_min = extrema(q, grid)
    assert rho_min == pytest.approx(0.25)
    assert p_min == pytest.approx(0.5)


def test_shock_front_position_tracks_step():
    spec = build_grid((64, 4), [(0.0, 1.0), (0.0, 0.1)])
    X, _ = spec.coordinates()
    q = np.zeros((8,) + spec.shape)
    q[physics.RHO] = np.where(X < 0.6, 2.0, 1.0)
    x_front = shock_front_position(q, spec)
    assert abs(x_front - 0.6) < 3 * spec.widths[0]


def test_shock_front_position_is_nan_for_flat_state(grid):
    q = np.ones((8,) + grid.shape)
    assert math.isnan(shock_front_position(q, grid))


def test_line_slice_picks_nearest_row(grid):
    X, Y = grid.coordinates()
    field = 10.0 * X + Y
    xs, values = line_slice(field, grid, 0, [0.5])
    assert xs.shape == (16,)
    y_row = values - 10.0 * xs
    assert np.allclose(y_row, y_row[0])
    assert abs(y_row[0] - 0.5) <= 0.5 * grid.widths[1] + 1e-12
    with pytest.raises(InvalidGridError):
        line_slice(field, grid, 0, [0.5, 0.5])


def test_perp_parallel_rotation():
    phi = math.atan(0.5)
    B = np.array([[math.cos(phi)], [math.sin(phi)]])
    perp, par = perp_parallel_components(B, phi)
    assert perp[0] == pytest.approx(1.0)
    assert par[0] == pytest.approx(0.0, abs=1e-15)


def test_schlieren_range_and_uniform_field(grid):
    assert np.all(schlieren(np.full(grid.shape, 3.0), grid) == 1.0)
    X, Y = grid.coordinates()
    rho = 1.0 + 0.5 * np.sin(2 * np.pi * X)
    image = schlieren(rho, grid, k=20.0)
    assert image.shape == grid.dims
    assert np.all((image > 0) & (image <= 1))
    assert np.min(image) == pytest.approx(math.exp(-20.0))
    linear = schlieren(rho, grid, log_scale=False)
    assert np.min(linear) == pytest.approx(math.exp(-20.0))


def test_schlieren_treats_roundoff_gradients_as_flat(grid):
    jitter = np.random.default_rng(3).uniform(-1.0, 1.0, grid.shape)
    rho = 0.7 * (1.0 + 1e-15 * jitter)
    assert np.all(schlieren(rho, grid) == 1.0)
    assert np.all(schlieren(rho, grid, log_scale=False) == 1.0)
