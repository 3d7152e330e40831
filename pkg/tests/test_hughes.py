import numpy as np
import pytest

from crowdflow.config import parse_config
from crowdflow.eikonal import solve_eikonal
from crowdflow.errors import NumericalError, StabilityError
from crowdflow.grid import boundary_flux_integral, build_grid, trapezoid
from crowdflow.hughes import hughes_step, run_hughes, simulate_hughes
from crowdflow.mobility import f_mobility
from crowdflow.params import ModelParams


def test_f_mobility():
    assert f_mobility(1 / 3, 1.0) == pytest.approx(2 / 3, abs=1e-15)
    assert f_mobility(1.0, 1.0) == 0
    assert f_mobility(0.0, 1.0) == 1


def test_step_center_node_hand_value(line201):
    # face densities 1/3, f = 2/3, F = 4/27; face slopes of phi are -1.5 (right) and +1.5 (left)
    # div(rho f^2 phi_x) = (4/27)(-1.5 - 1.5)/h = -4/(9h); diffusion vanishes on a constant
    grid, bmap = line201
    params = ModelParams(nu=0.01, dt=1e-4)
    rho = np.full(grid.shape, 1 / 3)
    phi = 1.5 * (1 - np.abs(grid.coords()))
    new = hughes_step(rho, phi, grid, bmap, params)
    assert new[100] == pytest.approx(1 / 3 - 1e-4 * 4 / (9 * 0.01), abs=1e-12)
    assert new[100] == pytest.approx(0.328889, abs=1e-6)
    # away from kink and exits the profile is unchanged
    assert np.all(np.abs(new[2:99] - 1 / 3) < 1e-15)


def test_step_closed_domain_conserves_mass():
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [21, 21], [], beta=0.0)
    rng = np.random.default_rng(1)
    rho = 0.2 + 0.1 * rng.uniform(size=grid.shape)
    phi = rng.uniform(size=grid.shape)
    params = ModelParams(beta=0.0, nu=0.01, dt=1e-4)
    new = hughes_step(rho, phi, grid, bmap, params)
    assert trapezoid(new, grid) == pytest.approx(trapezoid(rho, grid), abs=1e-12)


def test_vacuum_fixed_point(line201):
    grid, bmap = line201
    phi = 1 - np.abs(grid.coords())
    assert np.all(hughes_step(np.zeros(grid.shape), phi, grid, bmap, ModelParams()) == 0)


def test_mass_balance_per_step():
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [31, 31], ["sw", "ne"])
    params = ModelParams(nu=0.02, dt=1e-4)
    rho = np.full(grid.shape, 1 / 3)
    for n in range(50):
        phi = solve_eikonal(rho, grid, bmap, params).phi
        new = hughes_step(rho, phi, grid, bmap, params)
        expected = -params.dt * boundary_flux_integral(bmap.exit_flux(rho), grid)
        assert trapezoid(new, grid) - trapezoid(rho, grid) == pytest.approx(expected, abs=1e-12)
        rho = new


def test_negativity_and_nan_monitor(line201):
    grid, bmap = line201
    rho = np.full(grid.shape, 1 / 3)
    phi = 1.5 * (1 - np.abs(grid.coords()))
    with pytest.raises(StabilityError, match="step 7"):
        hughes_step(rho, 1e4 * phi, grid, bmap, ModelParams(), step=7)
    with pytest.raises(NumericalError):
        hughes_step(np.full(grid.shape, np.nan), phi, grid, bmap, ModelParams())


def test_closed_domain_mass_constant_1000_steps():
    grid, bmap = build_grid([[-1, 1]], [201], [], beta=0.0)
    params = ModelParams(beta=0.0, dt=1e-4)
    rho0 = 1 / 3 + 0.1 * np.cos(np.pi * grid.coords())
    phi = np.abs(grid.coords())
    rho = rho0
    for _ in range(1000):
        rho = hughes_step(rho, phi, grid, bmap, params)
    assert abs(trapezoid(rho, grid) - trapezoid(rho0, grid)) <= 1e-10


def test_short_run_symmetry_and_vacuum():
    cfg = parse_config(None, ["model.T=0.05", "numerics.snapshot_times=[0, 0.01, 0.05]"])
    traj = run_hughes(cfg)
    assert np.all(np.diff(traj.mass_series) < 0)
    for rho in traj.rho_snapshots:
        np.testing.assert_allclose(rho, rho[::-1], rtol=0, atol=1e-12)
    assert all(r[100] < 1 / 3 for r in traj.rho_snapshots[1:])
    np.testing.assert_allclose(-np.diff(traj.mass_series), traj.outflow_series, rtol=0, atol=1e-12)
    assert traj.times == [0.0, 0.01, 0.05]


def test_2d_symmetry_both_axes():
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [21, 21], ["sw", "se", "nw", "ne"])
    params = ModelParams(nu=0.1, dt=1e-3, T=0.05, snapshot_times=(0.05,))
    traj = simulate_hughes(np.full(grid.shape, 1 / 3), grid, bmap, params)
    rho = traj.rho_snapshots[-1]
    np.testing.assert_allclose(rho, rho[:, ::-1], rtol=0, atol=1e-12)
    np.testing.assert_allclose(rho, rho[::-1], rtol=0, atol=1e-12)
    np.testing.assert_allclose(rho, rho.T, rtol=0, atol=1e-12)


def test_refinement_order_at_least_one():
    final = {}
    for n, dt in [(41, 4e-4), (81, 1e-4), (161, 2.5e-5)]:
        grid, bmap = build_grid([[-1, 1]], [n], ["left", "right"])
        params = ModelParams(nu=0.05, dt=dt, T=0.2, snapshot_times=(0.2,))
        rho0 = 1 / 3 + 0.1 * np.cos(np.pi * grid.coords())
        final[n] = simulate_hughes(rho0, grid, bmap, params).rho_snapshots[-1]
    d1 = np.max(np.abs(final[81][::2] - final[41]))
    d2 = np.max(np.abs(final[161][::2] - final[81]))
    assert np.log2(d1 / d2) >= 1.0


def test_stability_rejected(line201):
    grid, bmap = line201
    with pytest.raises(Exception, match="nu\\*dt/h\\^2"):
        simulate_hughes(np.zeros(grid.shape), grid, bmap, ModelParams(nu=1.0, dt=1e-2, T=1.0))
