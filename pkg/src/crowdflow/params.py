"""Physical and algorithmic constants shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import GridSpec

ADJOINT_EXIT_BCS = ("beta_phi", "beta_rho")


def stability_limit(dim: int) -> float:
    """Largest admissible ``nu * dt / h**2`` for explicit diffusion."""
    return 0.5 / dim


@dataclass(frozen=True)
class ModelParams:
    rho_max: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    nu: float = 0.01
    T: float = 3.0
    dt: float = 1e-4
    # eikonal
    tol_eik: float = 1e-8
    max_sweeps: int = 1000
    eps_f: float = 1e-6
    # descent
    tol_desc: float = 1e-4
    max_iter: int = 500
    tau0: float = 1.0
    tau_min: float = 1e-12
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    eps_F: float = 1e-8
    adjoint_exit_bc: str = "beta_phi"
    # monitoring and output
    neg_tol: float = 1e-8
    snapshot_times: tuple[float, ...] = field(default=(0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        if self.rho_max <= 0:
            raise ConfigError(f"rho_max must be positive, got {self.rho_max}")
        if self.beta < 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta}")
        if self.nu < 0:
            raise ConfigError(f"nu must be non-negative, got {self.nu}")
        if self.alpha < 0:
            raise ConfigError(f"alpha must be non-negative, got {self.alpha}")
        if self.T <= 0 or self.dt <= 0:
            raise ConfigError(f"T and dt must be positive, got T={self.T}, dt={self.dt}")
        n = self.T / self.dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ConfigError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        if self.adjoint_exit_bc not in ADJOINT_EXIT_BCS:
            raise ConfigError(f"adjoint_exit_bc must be one of {ADJOINT_EXIT_BCS}")
        if any(t < 0 for t in self.snapshot_times):
            raise ConfigError(f"snapshot times must be non-negative, got {self.snapshot_times}")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    def snapshot_steps(self) -> list[int]:
        """Step indices nearest to the requested snapshot times, sorted and unique.

        Times beyond the horizon are dropped, so one list serves runs of any length.
        """
        steps = {int(round(t / self.dt)) for t in self.snapshot_times}
        return sorted(n for n in steps if n <= self.n_steps)

    def check_stability(self, grid: GridSpec) -> None:
        ratio = self.nu * self.dt / grid.h**2
        limit = stability_limit(grid.dim)
        if ratio > limit:
            raise ConfigError(
                f"parabolic stability violated: nu*dt/h^2 = {self.nu}*{self.dt}/{grid.h}^2 "
                f"= {ratio:.6g} > {limit:g} (d={grid.dim})"
            )
