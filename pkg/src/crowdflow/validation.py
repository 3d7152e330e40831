"""Built-in oracle checks run by ``crowdflow validate``."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from . import mfg
from .eikonal import solve_eikonal
from .grid import BoundaryMap, GridSpec, boundary_flux_integral, build_grid, trapezoid
from .hughes import hughes_step
from .params import ModelParams


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} <= {self.tolerance:.1e} ({self.seconds:.2f}s)"


def grid_graph_distance(grid: GridSpec, sources: np.ndarray, slowness: np.ndarray | None = None) -> np.ndarray:
    """Shortest paths on the 8-connected node graph, edge cost = length * mean slowness."""
    ny, nx = grid.shape
    s = np.ones(grid.shape) if slowness is None else slowness
    idx = np.arange(grid.size).reshape(grid.shape)
    rows, cols, cost = [], [], []
    for dj, di in ((0, 1), (1, 0), (1, 1), (1, -1)):
        j0, j1 = 0, ny - dj
        i0, i1 = max(0, -di), nx - max(0, di)
        a = idx[j0:j1, i0:i1]
        b = idx[j0 + dj : j1 + dj, i0 + di : i1 + di]
        length = grid.h * np.hypot(dj, di)
        c = length * 0.5 * (s.ravel()[a.ravel()] + s.ravel()[b.ravel()])
        rows += [a.ravel(), b.ravel()]
        cols += [b.ravel(), a.ravel()]
        cost += [c, c]
    graph = coo_matrix((np.concatenate(cost), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.size,) * 2)
    dist = dijkstra(graph.tocsr(), indices=np.flatnonzero(sources.ravel()), min_only=True)
    return dist.reshape(grid.shape)


def check_eikonal_1d() -> float:
    grid, bmap = build_grid([[-1, 1]], [201], ["left", "right"])
    sol = solve_eikonal(np.full(grid.shape, 1 / 3), grid, bmap, ModelParams())
    return float(np.max(np.abs(sol.phi - 1.5 * (1 - np.abs(grid.coords())))))


def check_eikonal_2d() -> float:
    grid, bmap = build_grid([[-1, 1], [-1, 1]], [101, 101], "all")
    sol = solve_eikonal(np.zeros(grid.shape), grid, bmap, ModelParams())
    return float(np.max(np.abs(sol.phi - grid_graph_distance(grid, bmap.exit_mask))))


def check_heat() -> float:
    grid, bmap = build_grid([[-1, 1]], [201], [], beta=0.0)
    params = ModelParams(beta=0.0, nu=0.01, dt=1e-3, T=1.0)
    x = grid.coords()
    m = np.zeros((params.n_steps, 1, *grid.shape))
    rho = mfg.fp_forward(m, 1 / 3 + 0.1 * np.cos(np.pi * x), grid, bmap, params)
    exact = 1 / 3 + 0.1 * np.exp(-params.nu * np.pi**2 * params.T) * np.cos(np.pi * x)
    return float(np.max(np.abs(rho[-1] - exact)))


def check_gradient(seed: int = 0) -> float:
    grid, bmap = build_grid([[-1, 1]], [11], ["left", "right"])
    params = ModelParams(nu=0.05, dt=0.01, T=0.1)
    rng = np.random.default_rng(seed)
    rho0 = 1 / 3 + 0.05 * rng.uniform(-1, 1, grid.shape)
    m = 0.1 * rng.uniform(-1, 1, (params.n_steps, 1, *grid.shape))

    def cost(mm):
        return mfg.cost_functional(mfg.fp_forward(mm, rho0, grid, bmap, params), mm, grid, params)

    rho = mfg.fp_forward(m, rho0, grid, bmap, params)
    g = mfg.descent_gradient(m, rho, mfg.adjoint_backward(rho, m, grid, bmap, params), grid, params)
    eps = 1e-5
    fd = np.empty_like(m)
    for idx in np.ndindex(m.shape):
        e = np.zeros_like(m)
        e[idx] = eps
        fd[idx] = (cost(m + e) - cost(m - e)) / (2 * eps) / (params.dt * grid.weights[idx[2:]])
    return float(np.linalg.norm(g - fd) / np.linalg.norm(fd))


def _balance(step, rho, grid: GridSpec, bmap: BoundaryMap, params: ModelParams, n_steps: int) -> float:
    worst = 0.0
    for n in range(n_steps):
        new = step(rho)
        expected = -params.dt * boundary_flux_integral(bmap.exit_flux(rho), grid)
        worst = max(worst, abs(trapezoid(new, grid) - trapezoid(rho, grid) - expected))
        rho = new
    return worst


def check_mass_balance() -> float:
    grid, bmap = build_grid([[-1, 1]], [201], ["left", "right"])
    hp = ModelParams(dt=1e-4)
    mp = ModelParams(dt=1e-3)
    rho0 = np.full(grid.shape, 1 / 3)

    def h_step(rho):
        phi = solve_eikonal(rho, grid, bmap, hp).phi
        return hughes_step(rho, phi, grid, bmap, hp)

    m0 = np.zeros((1, *grid.shape))

    def f_step(rho):
        return mfg._fp_step(rho, m0, grid, bmap, mp)

    return max(_balance(h_step, rho0, grid, bmap, hp, 1000), _balance(f_step, rho0, grid, bmap, mp, 1000))


CHECKS = [
    ("eikonal 1D analytic, max error", check_eikonal_1d, 2 * 0.01),
    ("eikonal 2D grid-graph shortest path, max error", check_eikonal_2d, 2 * 0.02),
    ("heat equation decay, max error at t=1", check_heat, 5e-3),
    ("adjoint gradient vs finite differences, relative L2", check_gradient, 1e-4),
    ("per-step discrete mass balance, max defect", check_mass_balance, 1e-12),
]


def run_checks() -> list[CheckResult]:
    results = []
    for name, fn, tol in CHECKS:
        t0 = time.perf_counter()
        value = fn()
        results.append(CheckResult(name, value, tol, time.perf_counter() - t0))
    return results
