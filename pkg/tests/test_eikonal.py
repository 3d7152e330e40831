import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dijkstra_8
from crowdflow.eikonal import SENTINEL, local_update, slowness, solve_eikonal, sweep_pass
from crowdflow.errors import ConfigError, EikonalError
from crowdflow.grid import build_grid
from crowdflow.params import ModelParams


def test_local_update_examples():
    assert local_update([0.3], 0.1, 1.5) == pytest.approx(0.45, abs=1e-15)
    assert local_update([0.0, 0.0], 0.1, 1.0) == pytest.approx(np.sqrt(0.02) / 2, abs=1e-15)
    assert local_update([0.0, 1e10], 0.1, 1.0) == pytest.approx(0.1, abs=1e-15)
    # order of the axis minima does not matter
    assert local_update([0.05, 0.0], 0.1, 1.0) == local_update([0.0, 0.05], 0.1, 1.0)


def test_solve_1d_constant_density(line201):
    grid, bmap = line201
    sol = solve_eikonal(np.full(grid.shape, 1 / 3), grid, bmap, ModelParams())
    exact = 1.5 * (1 - np.abs(grid.coords()))
    assert np.max(np.abs(sol.phi - exact)) <= 2 * grid.h
    assert sol.phi[100] == pytest.approx(1.5, abs=1e-12)
    assert sol.phi[0] == 0 and sol.phi[-1] == 0
    assert sol.residual <= 1e-8


def test_solve_1d_vacuum_is_distance(line201):
    grid, bmap = line201
    sol = solve_eikonal(np.zeros(grid.shape), grid, bmap, ModelParams())
    np.testing.assert_allclose(sol.phi, 1 - np.abs(grid.coords()), rtol=0, atol=1e-12)


def test_one_pass_reaches_fixed_point_constant_slowness(line201):
    grid, bmap = line201
    s = np.full(grid.shape, 1.5)
    phi = np.where(bmap.exit_mask, 0.0, SENTINEL)
    sweep_pass(phi, s, bmap.exit_mask, grid.h)
    np.testing.assert_allclose(phi, 1.5 * (1 - np.abs(grid.coords())), rtol=0, atol=1e-12)
    # a second pass only confirms it
    assert sweep_pass(phi, s, bmap.exit_mask, grid.h) == 0.0
    sol = solve_eikonal(np.full(grid.shape, 1 / 3), grid, bmap, ModelParams())
    assert sol.iterations == 2


def test_solve_2d_full_boundary_vs_dijkstra():
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [101, 101], "all")
    t0 = time.perf_counter()
    sol = solve_eikonal(np.zeros(grid.shape), grid, bmap, ModelParams())
    assert time.perf_counter() - t0 < 5
    oracle = dijkstra_8(grid, bmap.exit_mask)
    assert np.max(np.abs(sol.phi - oracle)) <= 2 * grid.h
    x, y = grid.mesh()
    assert np.max(np.abs(sol.phi - np.minimum(1 - np.abs(x), 1 - np.abs(y)))) <= 2 * grid.h


def test_walls_are_updated_not_fixed():
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [21, 21], ["sw", "se", "nw", "ne"])
    sol = solve_eikonal(np.zeros(grid.shape), grid, bmap, ModelParams())
    assert np.all(sol.phi < 10)
    assert np.all(sol.phi[bmap.exit_mask] == 0)
    assert np.all(sol.phi[~bmap.exit_mask] > 0)


def test_errors():
    grid, bmap = build_grid([[-1, 1]], [21], [], beta=0.0)
    with pytest.raises(ConfigError):
        solve_eikonal(np.zeros(grid.shape), grid, bmap, ModelParams(beta=0.0))
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [41, 41], ["sw"])
    with pytest.raises(EikonalError) as err:
        solve_eikonal(np.zeros(grid.shape), grid, bmap, ModelParams(max_sweeps=1))
    assert err.value.residual > 0


def test_slowness_floor():
    s = slowness(np.array([0.0, 1 / 3, 1.0, 1.5]), ModelParams())
    np.testing.assert_allclose(s, [1.0, 1.5, 1e6, 1e6])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_in_density(seed):
    rng = np.random.default_rng(seed)
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [15, 15], ["sw", "ne"])
    r1 = 0.6 * rng.uniform(size=grid.shape)
    r2 = np.minimum(r1 + 0.3 * rng.uniform(size=grid.shape), 0.95)
    p1 = solve_eikonal(r1, grid, bmap, ModelParams()).phi
    p2 = solve_eikonal(r2, grid, bmap, ModelParams()).phi
    assert np.all(p1 <= p2 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_causality(seed):
    rng = np.random.default_rng(seed)
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [13, 13], ["sw", "se"])
    sol = solve_eikonal(0.8 * rng.uniform(size=grid.shape), grid, bmap, ModelParams())
    p = np.pad(sol.phi, 1, constant_values=np.inf)
    ax = np.minimum(p[1:-1, :-2], p[1:-1, 2:])
    ay = np.minimum(p[:-2, 1:-1], p[2:, 1:-1])
    free = ~bmap.exit_mask
    assert np.all(sol.phi[free] > np.minimum(ax, ay)[free])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mirror_symmetry(seed):
    rng = np.random.default_rng(seed)
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [17, 17], ["sw", "se", "nw", "ne"])
    r = 0.8 * rng.uniform(size=grid.shape)
    r = 0.25 * (r + r[::-1] + r[:, ::-1] + r[::-1, ::-1])
    phi = solve_eikonal(r, grid, bmap, ModelParams()).phi
    np.testing.assert_allclose(phi, phi[:, ::-1], rtol=0, atol=1e-12)
    np.testing.assert_allclose(phi, phi[::-1], rtol=0, atol=1e-12)
