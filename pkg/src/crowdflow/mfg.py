"""Mean-field-game evacuation by adjoint steepest descent on the momentum.

The control is the space-time momentum ``m``. For a given ``m`` the density
follows the Fokker-Planck equation ``rho_t + div m = nu lap rho`` with exit
outflow ``beta * rho``; the cost is

    I(m) = 1/2 int int |m|^2 / F(rho)  +  alpha/2 int int rho,

with mobility ``F(rho) = rho (rho_max - rho)^2``. The backward equation
computed here is the exact adjoint of the discrete forward scheme and cost,
so ``descent_gradient`` is the exact gradient of the discrete cost.

Time layout: ``rho`` and ``phi`` have ``N + 1`` slices (t_0 .. t_N); ``m``
has ``N`` slices, ``m[n]`` being the momentum used on the step t_n -> t_{n+1}.
The kinetic term is summed over those N control intervals and the running
density cost over the states t_1 .. t_N reached after each step.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, StabilityError
from .grid import BoundaryMap, GridSpec, face_average, face_difference, flux_divergence, gradient_central, trapezoid
from .hughes import check_density
from .mobility import F_mobility
from .params import ModelParams

__all__ = [
    "ControlState",
    "DescentReport",
    "F_mobility",
    "adjoint_backward",
    "cost_functional",
    "descent_gradient",
    "fp_forward",
    "solve_mfg",
    "steepest_descent",
]

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
LINE_SEARCH_FAILED = "LineSearchFailed"


@dataclass
class ControlState:
    m: np.ndarray
    rho: np.ndarray
    phi: np.ndarray
    cost: float
    grad_norm: float
    times: np.ndarray

    def mass_series(self, grid: GridSpec) -> np.ndarray:
        return np.array([trapezoid(r, grid) for r in self.rho])


@dataclass
class DescentReport:
    iterations: int = 0
    cost_history: list[float] = field(default_factory=list)
    grad_norm_history: list[float] = field(default_factory=list)
    # step_sizes[k] produced iterate k; 0.0 for the initial iterate
    step_sizes: list[float] = field(default_factory=list)
    termination: str = ""
    line_search_evaluations: int = 0


def regularized_mobility(rho: np.ndarray, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """``max(F, eps_F)`` and its derivative (zero where the floor is active)."""
    F, dF = F_mobility(rho, params.rho_max)
    floored = F <= params.eps_F
    return np.where(floored, params.eps_F, F), np.where(floored, 0.0, dF)


def _fp_step(rho, m_n, grid, bmap, params):
    fluxes = [face_average(m_n[k], grid, k) - params.nu * face_difference(rho, grid, k) for k in range(grid.dim)]
    return rho - params.dt * flux_divergence(fluxes, grid, bmap.exit_flux(rho))


def _forward(control: Callable[[int], np.ndarray], rho0, grid, bmap, params, check=True) -> np.ndarray:
    rho = np.empty((params.n_steps + 1, *grid.shape))
    rho[0] = rho0
    for n in range(params.n_steps):
        rho[n + 1] = _fp_step(rho[n], control(n), grid, bmap, params)
        if check:
            check_density(rho[n + 1], grid, params.neg_tol, n + 1)
    return rho


def fp_forward(
    m: np.ndarray,
    rho0: np.ndarray,
    grid: GridSpec,
    bmap: BoundaryMap,
    params: ModelParams,
    *,
    check: bool = True,
) -> np.ndarray:
    """March the Fokker-Planck equation forward for the momentum series ``m``.

    Returns the density at all ``N + 1`` time levels. With ``check`` the
    density is monitored for NaN and for negativity beyond ``neg_tol``.
    """
    return _forward(lambda n: m[n], rho0, grid, bmap, params, check)


def _cost(rho, control, grid, params) -> float:
    kinetic = 0.0
    for n in range(params.n_steps):
        Feps, _ = regularized_mobility(rho[n], params)
        m_n = control(n)
        kinetic += trapezoid(np.sum(m_n * m_n, axis=0) / Feps, grid)
    running = sum(trapezoid(rho[n], grid) for n in range(1, params.n_steps + 1))
    return params.dt * (0.5 * kinetic + 0.5 * params.alpha * running)


def cost_functional(rho: np.ndarray, m: np.ndarray, grid: GridSpec, params: ModelParams) -> float:
    """Discrete cost: kinetic energy over the control intervals plus running density cost."""
    if len(m) != len(rho) - 1:
        raise ValueError(f"m has {len(m)} slices, expected {len(rho) - 1}")
    return _cost(rho, lambda n: m[n], grid, params)


def adjoint_source(rho_k: np.ndarray, m_k: np.ndarray | None, params: ModelParams) -> np.ndarray:
    """``1/2 |m|^2 F'(rho) / F(rho)^2 - alpha/2``."""
    if m_k is None:
        return np.full(rho_k.shape, -0.5 * params.alpha)
    Feps, dF = regularized_mobility(rho_k, params)
    return 0.5 * np.sum(m_k * m_k, axis=0) * dF / (Feps * Feps) - 0.5 * params.alpha


def adjoint_backward(
    rho: np.ndarray,
    m: np.ndarray,
    grid: GridSpec,
    bmap: BoundaryMap,
    params: ModelParams,
) -> np.ndarray:
    """Backward FTCS march of the adjoint equation from ``phi(T) = 0``.

    ``-phi_t - nu lap phi = 1/2 |m|^2 F'/F^2 - alpha/2`` with zero normal
    derivative on walls. On exits the default closure is
    ``nu dphi/dn + beta phi = 0``; ``params.adjoint_exit_bc == "beta_rho"``
    uses ``nu dphi/dn + beta rho = 0`` instead (not the exact adjoint).
    """
    N = params.n_steps
    phi = np.empty((N + 1, *grid.shape))
    phi[N] = 0.0
    for k in range(N, 0, -1):
        p = phi[k]
        q = bmap.exit_flux(rho[k] if params.adjoint_exit_bc == "beta_rho" else p)
        diff = -flux_divergence([-params.nu * face_difference(p, grid, j) for j in range(grid.dim)], grid, q)
        src = adjoint_source(rho[k], m[k] if k < N else None, params)
        phi[k - 1] = p + params.dt * (diff + src)
    if not np.all(np.isfinite(phi)):
        raise NumericalError("non-finite adjoint")
    return phi


def descent_gradient(m: np.ndarray, rho: np.ndarray, phi: np.ndarray, grid: GridSpec, params: ModelParams) -> np.ndarray:
    """Gradient ``m / F(rho) - grad phi`` of the cost with respect to ``m``.

    It is the Riesz representative in the inner product of ``inner``.
    """
    g = np.empty_like(m)
    for n in range(len(m)):
        Feps, _ = regularized_mobility(rho[n], params)
        g[n] = m[n] / Feps - gradient_central(phi[n], grid)
    return g


def inner(a: np.ndarray, b: np.ndarray, grid: GridSpec, dt: float) -> float:
    """Space-time inner product ``dt * sum_n sum_nodes w a.b``."""
    total = 0.0
    for n in range(len(a)):
        total += trapezoid(np.sum(a[n] * b[n], axis=0), grid)
    return dt * total


def solve_mfg(
    rho0: np.ndarray,
    grid: GridSpec,
    bmap: BoundaryMap,
    params: ModelParams,
    *,
    m0: np.ndarray | None = None,
    callback: Callable[[int, float, float], None] | None = None,
) -> tuple[ControlState, DescentReport]:
    """Steepest descent with Armijo backtracking, starting from ``m = 0``.

    A trial step whose forward solve breaks the negativity monitor is
    treated like one that fails the Armijo test. The first trial step of
    each line search is ``min(tau0, 2 * previous accepted step)``.
    """
    params.check_stability(grid)
    N = params.n_steps
    m = np.zeros((N, grid.dim, *grid.shape)) if m0 is None else np.array(m0, dtype=float)
    rho = fp_forward(m, rho0, grid, bmap, params)
    cost = cost_functional(rho, m, grid, params)
    report = DescentReport()
    tau_prev = params.tau0
    step_used = 0.0
    while True:
        phi = adjoint_backward(rho, m, grid, bmap, params)
        g = descent_gradient(m, rho, phi, grid, params)
        gg = inner(g, g, grid, params.dt)
        grad_norm = math.sqrt(gg)
        report.cost_history.append(cost)
        report.grad_norm_history.append(grad_norm)
        report.step_sizes.append(step_used)
        if callback is not None:
            callback(report.iterations, cost, grad_norm)
        if grad_norm <= params.tol_desc:
            report.termination = CONVERGED
            break
        if report.iterations >= params.max_iter:
            report.termination = MAX_ITER
            break

        tau = min(params.tau0, 2.0 * tau_prev)
        accepted = None
        while tau >= params.tau_min:
            report.line_search_evaluations += 1

            def trial(n, tau=tau):
                return m[n] - tau * g[n]

            try:
                rho_t = _forward(trial, rho0, grid, bmap, params)
            except StabilityError:
                tau *= params.backtrack
                continue
            cost_t = _cost(rho_t, trial, grid, params)
            if math.isfinite(cost_t) and cost_t < cost and cost_t <= cost - params.armijo_c * tau * gg:
                accepted = (rho_t, cost_t)
                break
            tau *= params.backtrack
        if accepted is None:
            report.termination = LINE_SEARCH_FAILED
            break
        for n in range(N):
            m[n] = m[n] - tau * g[n]
        rho, cost = accepted
        tau_prev = step_used = tau
        report.iterations += 1

    state = ControlState(m=m, rho=rho, phi=phi, cost=cost, grad_norm=grad_norm, times=params.times)
    return state, report


def steepest_descent(config, **kwargs) -> tuple[ControlState, DescentReport]:
    """Run the descent for a parsed ``SimConfig``."""
    from .config import build_problem

    grid, bmap, rho0, params = build_problem(config, "mfg")
    return solve_mfg(rho0, grid, bmap, params, **kwargs)
