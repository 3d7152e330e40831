"""Strict JSON configuration for all subcommands.

An empty document ``{}`` reproduces the one-dimensional evacuation
experiment: corridor [-1, 1] with exits at both ends, h = 0.01,
rho0 = 1/3, rho_max = alpha = beta = 1, nu = h, T = 3, dt = 1e-4 for the
Hughes model and 1e-3 for the MFG descent.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError, ConfigFileNotFound, ConfigSyntaxError, UnknownConfigKey
from .grid import CORNERS, ENDPOINTS, BoundaryMap, GridSpec, build_grid
from .params import ADJOINT_EXIT_BCS, ModelParams

SOLVERS = ("hughes", "mfg")
OUTPUT_FIELDS = ("rho", "phi", "m")


@dataclass
class GeometryConfig:
    dim: int = 1
    extents: list[list[float]] | None = None
    n_nodes: list[int] | None = None
    exits: list[str] | None = None
    exit_width: float = 0.2


@dataclass
class ModelConfig:
    rho_max: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    # None ties the diffusion to the grid spacing, nu = h
    nu: float | None = None
    rho0: Any = 1.0 / 3.0
    T: float = 3.0


@dataclass
class NumericsConfig:
    dt_hughes: float = 1e-4
    dt_mfg: float = 1e-3
    tol_eik: float = 1e-8
    max_sweeps: int = 1000
    tol_desc: float = 1e-4
    max_iter: int = 500
    tau0: float = 1.0
    neg_tol: float = 1e-8
    snapshot_times: list[float] = field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    adjoint_exit_bc: str = "beta_phi"


@dataclass
class AnalysisConfig:
    evacuation_threshold: float = 0.01
    equilibration_window: list[float] = field(default_factory=lambda: [0.5, 1.5])


@dataclass
class OutputConfig:
    directory: str = "out"
    fields: list[str] = field(default_factory=lambda: ["rho", "phi"])


@dataclass
class SimConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {f.name: f.default_factory for f in fields(SimConfig)}


def _strict(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section {where!r} must be a JSON object")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise UnknownConfigKey(f"unknown config key {where}.{key!r}" if where else f"unknown config key {key!r}")
    return cls(**data)


def _parse_override(item: str) -> tuple[list[str], Any]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form section.key=value")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    data = json.loads(json.dumps(data))
    for item in overrides:
        path, value = _parse_override(item)
        if len(path) != 2 or path[0] not in _SECTIONS:
            raise UnknownConfigKey(f"override key {'.'.join(path)!r} must be <section>.<key>")
        data.setdefault(path[0], {})[path[1]] = value
    return data


def config_from_dict(data: dict, overrides: list[str] | None = None, base_dir: str | os.PathLike | None = None) -> SimConfig:
    """Build, default-fill and validate a ``SimConfig`` from parsed JSON."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    data = apply_overrides(data, overrides or [])
    for key in data:
        if key not in _SECTIONS:
            raise UnknownConfigKey(f"unknown config key {key!r}")
    cfg = SimConfig(
        geometry=_strict(GeometryConfig, data.get("geometry", {}), "geometry"),
        model=_strict(ModelConfig, data.get("model", {}), "model"),
        numerics=_strict(NumericsConfig, data.get("numerics", {}), "numerics"),
        analysis=_strict(AnalysisConfig, data.get("analysis", {}), "analysis"),
        output=_strict(OutputConfig, data.get("output", {}), "output"),
    )
    _fill_defaults(cfg, base_dir)
    validate(cfg)
    return cfg


def parse_config(path: str | os.PathLike | None = None, overrides: list[str] | None = None) -> SimConfig:
    """Read a JSON config file; ``path=None`` starts from the defaults."""
    if path is None:
        return config_from_dict({}, overrides)
    path = Path(path)
    if not path.is_file():
        raise ConfigFileNotFound(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(f"malformed JSON in {path}: {exc}") from exc
    return config_from_dict(data, overrides, base_dir=path.parent)


def dump_config(cfg: SimConfig, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def _fill_defaults(cfg: SimConfig, base_dir) -> None:
    geo = cfg.geometry
    if geo.dim not in (1, 2):
        raise ConfigError(f"geometry.dim must be 1 or 2, got {geo.dim}")
    if geo.extents is None:
        geo.extents = [[-1.0, 1.0] for _ in range(geo.dim)]
    if geo.n_nodes is None:
        geo.n_nodes = [201] * geo.dim
    if geo.exits is None:
        geo.exits = list(ENDPOINTS) if geo.dim == 1 else list(CORNERS)
    elif isinstance(geo.exits, str):
        geo.exits = [geo.exits]
    if len(geo.extents) != geo.dim or len(geo.n_nodes) != geo.dim:
        raise ConfigError(f"geometry.extents and geometry.n_nodes need {geo.dim} entries")
    geo.extents = [[float(lo), float(hi)] for lo, hi in geo.extents]
    geo.n_nodes = [int(n) for n in geo.n_nodes]
    if cfg.model.nu is None:
        cfg.model.nu = _grid(cfg).h
    rho0 = cfg.model.rho0
    if isinstance(rho0, dict) and rho0.get("type") == "csv" and base_dir is not None:
        p = Path(rho0.get("path", ""))
        if not p.is_absolute():
            cfg.model.rho0 = {**rho0, "path": str((Path(base_dir) / p).resolve())}
    cfg.numerics.snapshot_times = [float(t) for t in cfg.numerics.snapshot_times]


def _grid(cfg: SimConfig) -> GridSpec:
    return GridSpec(tuple(tuple(e) for e in cfg.geometry.extents), tuple(cfg.geometry.n_nodes))


def _positive(name: str, value) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")


def validate(cfg: SimConfig) -> None:
    m, nm = cfg.model, cfg.numerics
    for name in ("rho_max", "T"):
        _positive(f"model.{name}", getattr(m, name))
    for name in ("dt_hughes", "dt_mfg", "tol_eik", "tol_desc", "tau0", "neg_tol", "max_sweeps"):
        _positive(f"numerics.{name}", getattr(nm, name))
    if not isinstance(nm.max_iter, int) or nm.max_iter < 0:
        raise ConfigError(f"numerics.max_iter must be a non-negative integer, got {nm.max_iter!r}")
    if nm.adjoint_exit_bc not in ADJOINT_EXIT_BCS:
        raise ConfigError(f"numerics.adjoint_exit_bc must be one of {ADJOINT_EXIT_BCS}")
    bad = [f for f in cfg.output.fields if f not in OUTPUT_FIELDS]
    if bad:
        raise ConfigError(f"output.fields entries must be among {OUTPUT_FIELDS}, got {bad}")
    a = cfg.analysis
    if not 0 < a.evacuation_threshold < 1:
        raise ConfigError("analysis.evacuation_threshold must lie in (0, 1)")
    if len(a.equilibration_window) != 2 or not a.equilibration_window[0] < a.equilibration_window[1]:
        raise ConfigError("analysis.equilibration_window must be [start, end] with start < end")
    grid, _ = problem_grid(cfg)
    for solver in SOLVERS:
        model_params(cfg, solver).check_stability(grid)
    _validate_rho0(m.rho0, m.rho_max)


def _validate_rho0(spec, rho_max: float) -> None:
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        if not 0 <= spec <= rho_max:
            raise ConfigError(f"model.rho0 constant must lie in [0, rho_max], got {spec}")
        return
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("model.rho0 must be a number or an object with a 'type' key")
    kind = spec["type"]
    allowed = {
        "constant": {"type", "value"},
        "cosine": {"type", "mean", "amplitude", "wavenumber"},
        "csv": {"type", "path"},
    }
    if kind not in allowed:
        raise ConfigError(f"model.rho0 type must be one of {sorted(allowed)}, got {kind!r}")
    extra = set(spec) - allowed[kind]
    if extra:
        raise UnknownConfigKey(f"unknown config key model.rho0.{sorted(extra)[0]!r}")
    if kind == "csv" and not Path(spec.get("path", "")).is_file():
        raise ConfigFileNotFound(f"initial density file not found: {spec.get('path')}")


def problem_grid(cfg: SimConfig) -> tuple[GridSpec, BoundaryMap]:
    geo = cfg.geometry
    return build_grid(geo.extents, geo.n_nodes, geo.exits, geo.exit_width, cfg.model.beta)


def model_params(cfg: SimConfig, solver: str) -> ModelParams:
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}")
    m, nm = cfg.model, cfg.numerics
    return ModelParams(
        rho_max=m.rho_max,
        alpha=m.alpha,
        beta=m.beta,
        nu=m.nu,
        T=m.T,
        dt=nm.dt_hughes if solver == "hughes" else nm.dt_mfg,
        tol_eik=nm.tol_eik,
        max_sweeps=nm.max_sweeps,
        tol_desc=nm.tol_desc,
        max_iter=nm.max_iter,
        tau0=nm.tau0,
        neg_tol=nm.neg_tol,
        snapshot_times=tuple(nm.snapshot_times),
        adjoint_exit_bc=nm.adjoint_exit_bc,
    )


def initial_density(cfg: SimConfig, grid: GridSpec) -> np.ndarray:
    spec = cfg.model.rho0
    if isinstance(spec, (int, float)):
        return np.full(grid.shape, float(spec))
    kind = spec["type"]
    if kind == "constant":
        return np.full(grid.shape, float(spec["value"]))
    if kind == "cosine":
        # mean + amplitude * prod_k cos(k_w * pi * x_k)
        k = float(spec.get("wavenumber", 1.0))
        profile = np.ones(grid.shape)
        for x in grid.mesh():
            profile = profile * np.cos(k * np.pi * x)
        return float(spec.get("mean", 1.0 / 3.0)) + float(spec.get("amplitude", 0.1)) * profile
    from .io import read_snapshot

    return read_snapshot(spec["path"], grid)


def build_problem(cfg: SimConfig, solver: str) -> tuple[GridSpec, BoundaryMap, np.ndarray, ModelParams]:
    grid, bmap = problem_grid(cfg)
    return grid, bmap, initial_density(cfg, grid), model_params(cfg, solver)


__all__ = [
    "SimConfig",
    "GeometryConfig",
    "ModelConfig",
    "NumericsConfig",
    "AnalysisConfig",
    "OutputConfig",
    "parse_config",
    "config_from_dict",
    "dump_config",
    "build_problem",
    "model_params",
    "problem_grid",
    "initial_density",
]
