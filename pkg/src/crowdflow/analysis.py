"""Diagnostics relating the Hughes and MFG solutions."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import GridSpec, gradient_central, trapezoid
from .hughes import Trajectory
from .mfg import ControlState
from .mobility import f_mobility
from .params import ModelParams


def total_mass(rho: np.ndarray, grid: GridSpec) -> float:
    return trapezoid(rho, grid)


def _center_index(n: int) -> int:
    if n % 2 == 0:
        raise ConfigError(f"no node sits on the centre line: even node count {n}")
    return n // 2


def center_cross_section(field2d: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Values on the node row ``y = centre``, ordered by x."""
    if grid.dim != 2:
        raise ConfigError("centre cross-section needs a 2D grid")
    return np.array(field2d[_center_index(grid.n_nodes[1])], copy=True)


def center_value(field: np.ndarray, grid: GridSpec) -> float:
    idx = tuple(_center_index(n) for n in grid.shape)
    return float(field[idx])


def limit_residual(rho: np.ndarray, phi: np.ndarray, grid: GridSpec, params: ModelParams) -> np.ndarray:
    """Pointwise residual ``(f + 2 rho f') |grad phi|^2 - alpha / f`` of the stationary limit.

    ``f`` is floored at ``eps_f``. Where ``f + 2 rho f'`` is not positive the
    stationary relation has no real solution and the signed residual is
    reported as is.
    """
    f = np.maximum(f_mobility(rho, params.rho_max), params.eps_f)
    # f + 2 rho f' with f' = -1, written so that it vanishes exactly at rho_max / 3
    coeff = params.rho_max - 3.0 * rho
    grad2 = np.sum(gradient_central(phi, grid) ** 2, axis=0)
    return coeff * grad2 - params.alpha / f


def equilibration_measure(phi_series: np.ndarray, times: np.ndarray, window: tuple[float, float]) -> float:
    """Largest ``max|phi(t+dt) - phi(t)| / dt`` over steps inside ``window``."""
    t0, t1 = window
    tol = 1e-9 * max(1.0, abs(t1))
    steps = [n for n in range(len(times) - 1) if times[n] >= t0 - tol and times[n + 1] <= t1 + tol]
    if not steps:
        raise ConfigError(f"equilibration window {window} contains no time step")
    return max(float(np.max(np.abs(phi_series[n + 1] - phi_series[n]))) / (times[n + 1] - times[n]) for n in steps)


def evacuation_time(mass: np.ndarray, times: np.ndarray, threshold: float = 0.01) -> float | None:
    """First time with mass at most ``threshold`` times the initial mass."""
    hit = np.nonzero(mass <= threshold * mass[0])[0]
    return float(times[hit[0]]) if hit.size else None


def first_time_below(series, times, level: float) -> float | None:
    for t, v in zip(times, series):
        if v < level:
            return float(t)
    return None


@dataclass
class ModelSeries:
    """Snapshot view of one model's solution, potentials in Hughes sign convention."""

    rho: list[np.ndarray]
    phi: list[np.ndarray]
    step_times: np.ndarray
    mass: np.ndarray
    center: np.ndarray | None
    phi_full: np.ndarray | None = None


def _has_center(grid: GridSpec) -> bool:
    return all(n % 2 == 1 for n in grid.n_nodes)


def as_series(model, times, grid: GridSpec) -> ModelSeries:
    """Snapshots of a ``Trajectory`` or ``ControlState`` at ``times`` (nearest step).

    The MFG potential is returned negated so both models share the sign of
    a travel-cost potential that is largest far from the exits.
    """
    if isinstance(model, Trajectory):
        snap_t = np.asarray(model.times)
        idx = [int(np.argmin(np.abs(snap_t - t))) for t in times]
        return ModelSeries(
            [model.rho_snapshots[i] for i in idx],
            [model.phi_snapshots[i] for i in idx],
            np.asarray(model.step_times),
            np.asarray(model.mass_series),
            None if model.center_series is None else np.asarray(model.center_series),
        )
    if isinstance(model, ControlState):
        step_times = np.asarray(model.times)
        idx = [int(np.argmin(np.abs(step_times - t))) for t in times]
        center = np.array([center_value(r, grid) for r in model.rho]) if _has_center(grid) else None
        return ModelSeries(
            [model.rho[i] for i in idx],
            [-model.phi[i] for i in idx],
            step_times,
            model.mass_series(grid),
            center,
            phi_full=model.phi,
        )
    raise TypeError(f"cannot compare objects of type {type(model).__name__}")


@dataclass
class ComparisonReport:
    times: list[float]
    density_l2_diff: list[float]
    density_max_diff: list[float]
    center_density_diff: list[float]
    potential_l2_diff: list[float]
    potential_correlation: list[float | None]
    mass_a: list[float]
    mass_b: list[float]
    center_density_a: list[float]
    center_density_b: list[float]
    evacuation_time_a: float | None
    evacuation_time_b: float | None
    waiting_time_a: float | None
    waiting_time_b: float | None
    limit_residual_a: list[dict]
    limit_residual_b: list[dict]
    equilibration_a: float | None = None
    equilibration_b: float | None = None
    center_line_a: list[list[float]] = field(default_factory=list)
    center_line_b: list[list[float]] = field(default_factory=list)
    labels: tuple[str, str] = ("hughes", "mfg")

    def to_dict(self) -> dict:
        return asdict(self)


def _residual_stats(rho, phi, grid, params) -> dict:
    interior = ~grid.boundary_mask & (rho < params.rho_max - params.eps_f)
    if not interior.any():
        return {"max_abs": None, "mean_abs": None}
    r = np.abs(limit_residual(rho, phi, grid, params)[interior])
    return {"max_abs": float(r.max()), "mean_abs": float(r.mean())}


def _corr(a, b) -> float | None:
    a = a.ravel() - a.mean()
    b = b.ravel() - b.mean()
    den = np.sqrt(np.dot(a, a) * np.dot(b, b))
    return float(np.dot(a, b) / den) if den > 0 else None


def compare_models(
    a,
    b,
    grid: GridSpec,
    params: ModelParams,
    *,
    times=None,
    evacuation_threshold: float = 0.01,
    equilibration_window: tuple[float, float] = (0.5, 1.5),
    labels: tuple[str, str] = ("hughes", "mfg"),
) -> ComparisonReport:
    """Compare two solutions (``Trajectory`` or ``ControlState``) snapshot by snapshot.

    Differences are taken as ``a - b``; norms are symmetric in the two
    arguments. ``times`` defaults to the snapshot times of ``a`` (or of
    ``params`` when ``a`` is a ``ControlState``).
    """
    if times is None:
        times = a.times if isinstance(a, Trajectory) else [n * params.dt for n in params.snapshot_steps()]
    times = [float(t) for t in times]
    sa, sb = as_series(a, times, grid), as_series(b, times, grid)
    if any(r.shape != grid.shape for r in sa.rho + sb.rho):
        raise ConfigError("solution grid does not match the comparison grid")

    w = grid.weights
    rho0 = sa.rho[0]
    report = ComparisonReport(
        times=times,
        density_l2_diff=[float(np.sqrt(np.sum(w * (ra - rb) ** 2))) for ra, rb in zip(sa.rho, sb.rho)],
        density_max_diff=[float(np.max(np.abs(ra - rb))) for ra, rb in zip(sa.rho, sb.rho)],
        center_density_diff=[center_value(ra, grid) - center_value(rb, grid) for ra, rb in zip(sa.rho, sb.rho)],
        potential_l2_diff=[float(np.sqrt(np.sum(w * (pa - pb) ** 2))) for pa, pb in zip(sa.phi, sb.phi)],
        potential_correlation=[_corr(pa, pb) for pa, pb in zip(sa.phi, sb.phi)],
        mass_a=[float(sa.mass[int(np.argmin(np.abs(sa.step_times - t)))]) for t in times],
        mass_b=[float(sb.mass[int(np.argmin(np.abs(sb.step_times - t)))]) for t in times],
        center_density_a=[center_value(r, grid) for r in sa.rho],
        center_density_b=[center_value(r, grid) for r in sb.rho],
        evacuation_time_a=evacuation_time(sa.mass, sa.step_times, evacuation_threshold),
        evacuation_time_b=evacuation_time(sb.mass, sb.step_times, evacuation_threshold),
        waiting_time_a=None,
        waiting_time_b=None,
        limit_residual_a=[_residual_stats(r, p, grid, params) for r, p in zip(sa.rho, sa.phi)],
        limit_residual_b=[_residual_stats(r, p, grid, params) for r, p in zip(sb.rho, sb.phi)],
        labels=tuple(labels),
    )
    half = 0.5 * center_value(rho0, grid)
    for s_, side in ((sa, "a"), (sb, "b")):
        if s_.center is not None:
            setattr(report, f"waiting_time_{side}", first_time_below(s_.center, s_.step_times, half))
        if s_.phi_full is not None:
            value = equilibration_measure(s_.phi_full, s_.step_times, equilibration_window)
            setattr(report, f"equilibration_{side}", value)
    if grid.dim == 2:
        report.center_line_a = [center_cross_section(r, grid).tolist() for r in sa.rho]
        report.center_line_b = [center_cross_section(r, grid).tolist() for r in sb.rho]
    return report
