"""Fast sweeping solver for the density-weighted Eikonal equation.

Solves ``|grad phi| = 1 / f(rho)`` with ``phi = 0`` on exit nodes. Wall nodes
are not pinned: they are updated like interior nodes from their inward
neighbours, which keeps characteristics from entering through walls.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numba
import numpy as np

from .errors import ConfigError, EikonalError
from .grid import BoundaryMap, GridSpec
from .mobility import f_mobility
from .params import ModelParams

SENTINEL = 1e10


@dataclass(frozen=True)
class EikonalSolution:
    phi: np.ndarray
    iterations: int
    residual: float


@numba.njit(cache=True, inline="always")
def _godunov2(a, b, hs):
    if a > b:
        a, b = b, a
    if b - a >= hs:
        return a + hs
    return 0.5 * (a + b + math.sqrt(2.0 * hs * hs - (a - b) * (a - b)))


def local_update(neighbors: Sequence[float], h: float, s: float) -> float:
    """Godunov upwind candidate for one node.

    ``neighbors`` holds, per axis, the smaller of the two neighbouring values.
    """
    if len(neighbors) == 1:
        return float(neighbors[0]) + h * s
    a, b = float(neighbors[0]), float(neighbors[1])
    return float(_godunov2(a, b, h * s))


@numba.njit(cache=True)
def _pass_1d(u, s, fixed, h):
    n = u.shape[0]
    change = 0.0
    for sweep in range(2):
        for k in range(n):
            i = k if sweep == 0 else n - 1 - k
            if fixed[i]:
                continue
            left = u[i - 1] if i > 0 else SENTINEL
            right = u[i + 1] if i < n - 1 else SENTINEL
            cand = min(left, right) + h * s[i]
            if cand < u[i]:
                change = max(change, u[i] - cand)
                u[i] = cand
    return change


@numba.njit(cache=True)
def _pass_2d(u, s, fixed, h):
    ny, nx = u.shape
    change = 0.0
    for sweep in range(4):
        xrev = sweep == 1 or sweep == 2
        yrev = sweep >= 2
        for jj in range(ny):
            j = ny - 1 - jj if yrev else jj
            for ii in range(nx):
                i = nx - 1 - ii if xrev else ii
                if fixed[j, i]:
                    continue
                west = u[j, i - 1] if i > 0 else SENTINEL
                east = u[j, i + 1] if i < nx - 1 else SENTINEL
                south = u[j - 1, i] if j > 0 else SENTINEL
                north = u[j + 1, i] if j < ny - 1 else SENTINEL
                a = min(west, east)
                b = min(south, north)
                if min(a, b) >= SENTINEL:
                    continue
                cand = _godunov2(a, b, h * s[j, i])
                if cand < u[j, i]:
                    change = max(change, u[j, i] - cand)
                    u[j, i] = cand
    return change


def slowness(rho: np.ndarray, params: ModelParams) -> np.ndarray:
    """``1 / max(f(rho), eps_f)``; the floor removes the singularity at rho_max."""
    return 1.0 / np.maximum(f_mobility(rho, params.rho_max), params.eps_f)


def sweep_pass(phi: np.ndarray, s: np.ndarray, fixed: np.ndarray, h: float) -> float:
    """One Gauss-Seidel pass over all 2**dim orderings, in place. Returns the max change."""
    kernel = _pass_1d if phi.ndim == 1 else _pass_2d
    return float(kernel(phi, s, fixed, h))


def solve_eikonal(
    rho: np.ndarray,
    grid: GridSpec,
    bmap: BoundaryMap,
    params: ModelParams,
    *,
    step: int | None = None,
) -> EikonalSolution:
    """Fast sweeping solve of ``|grad phi| = 1 / f(rho)``.

    Raises
    ------
    ConfigError
        If the boundary map has no exit nodes.
    EikonalError
        If the pass-to-pass change stays above ``params.tol_eik`` after
        ``params.max_sweeps`` passes.
    """
    if not bmap.has_exits:
        raise ConfigError("the Eikonal equation needs at least one exit node")
    s = np.ascontiguousarray(slowness(rho, params), dtype=float)
    fixed = np.ascontiguousarray(bmap.exit_mask)
    phi = np.where(fixed, 0.0, SENTINEL)
    residual = math.inf
    for it in range(1, params.max_sweeps + 1):
        residual = sweep_pass(phi, s, fixed, grid.h)
        if residual <= params.tol_eik:
            return EikonalSolution(phi, it, residual)
    raise EikonalError(
        f"fast sweeping did not converge in {params.max_sweeps} passes (residual {residual:.3e})",
        residual=residual,
        step=step,
    )
