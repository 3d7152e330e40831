"""Explicit time marching of the Hughes model.

The density obeys ``rho_t = div(rho f(rho)^2 grad phi) + nu lap rho`` and
``phi`` is the Eikonal potential of the current density, recomputed every
step. Exit nodes lose mass at the rate ``beta * rho``; walls are closed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eikonal import solve_eikonal
from .errors import NumericalError, StabilityError
from .grid import (
    BoundaryMap,
    GridSpec,
    boundary_flux_integral,
    face_average,
    face_difference,
    flux_divergence,
    trapezoid,
)
from .mobility import f_mobility
from .params import ModelParams

__all__ = ["Trajectory", "f_mobility", "hughes_step", "simulate_hughes", "run_hughes"]


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    rho_snapshots: list[np.ndarray] = field(default_factory=list)
    phi_snapshots: list[np.ndarray] = field(default_factory=list)
    step_times: np.ndarray | None = None
    mass_series: np.ndarray | None = None
    # dt * (boundary integral of beta*rho) lost during step n
    outflow_series: np.ndarray | None = None
    eikonal_passes: list[int] = field(default_factory=list)
    # density at the centre node per step (odd node counts only)
    center_series: np.ndarray | None = None


def check_density(rho: np.ndarray, grid: GridSpec, neg_tol: float, step: int | None = None) -> None:
    if not np.all(np.isfinite(rho)):
        raise NumericalError("non-finite density", step=step)
    i = int(np.argmin(rho))
    if rho.flat[i] < -neg_tol:
        node = np.unravel_index(i, grid.shape)
        raise StabilityError(f"density {rho.flat[i]:.3e} below -{neg_tol:g} at node {node}", step=step)


def hughes_flux(rho: np.ndarray, phi: np.ndarray, grid: GridSpec, params: ModelParams) -> list[np.ndarray]:
    """Total face flux ``-rho f^2 dphi/dx - nu drho/dx`` per axis."""
    fluxes = []
    for k in range(grid.dim):
        rbar = face_average(rho, grid, k)
        fbar = f_mobility(rbar, params.rho_max)
        G = rbar * fbar * fbar * face_difference(phi, grid, k)
        fluxes.append(-G - params.nu * face_difference(rho, grid, k))
    return fluxes


def hughes_step(
    rho: np.ndarray,
    phi: np.ndarray,
    grid: GridSpec,
    bmap: BoundaryMap,
    params: ModelParams,
    *,
    step: int | None = None,
) -> np.ndarray:
    """One FTCS step of the density equation for a frozen potential."""
    div = flux_divergence(hughes_flux(rho, phi, grid, params), grid, bmap.exit_flux(rho))
    rho_new = rho - params.dt * div
    check_density(rho_new, grid, params.neg_tol, step)
    return rho_new


def simulate_hughes(rho0: np.ndarray, grid: GridSpec, bmap: BoundaryMap, params: ModelParams) -> Trajectory:
    params.check_stability(grid)
    n_steps = params.n_steps
    wanted = set(params.snapshot_steps())
    traj = Trajectory(step_times=params.times)
    mass = np.empty(n_steps + 1)
    outflow = np.empty(n_steps)
    center = tuple(n // 2 for n in grid.shape) if all(n % 2 for n in grid.shape) else None
    center_series = np.empty(n_steps + 1)
    rho = np.array(rho0, dtype=float)
    check_density(rho, grid, params.neg_tol, 0)
    for n in range(n_steps + 1):
        sol = solve_eikonal(rho, grid, bmap, params, step=n)
        traj.eikonal_passes.append(sol.iterations)
        mass[n] = trapezoid(rho, grid)
        if center is not None:
            center_series[n] = rho[center]
        if n in wanted:
            traj.times.append(n * params.dt)
            traj.rho_snapshots.append(rho.copy())
            traj.phi_snapshots.append(sol.phi)
        if n == n_steps:
            break
        outflow[n] = params.dt * boundary_flux_integral(bmap.exit_flux(rho), grid)
        rho = hughes_step(rho, sol.phi, grid, bmap, params, step=n)
    traj.mass_series = mass
    traj.outflow_series = outflow
    traj.center_series = center_series if center is not None else None
    return traj


def run_hughes(config) -> Trajectory:
    """Run the Hughes model for a parsed ``SimConfig``."""
    from .config import build_problem

    grid, bmap, rho0, params = build_problem(config, "hughes")
    return simulate_hughes(rho0, grid, bmap, params)
