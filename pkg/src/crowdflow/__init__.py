"""Hughes and mean-field-game models of pedestrian evacuation."""

__version__ = "0.1.0"

from .analysis import compare_models
from .config import SimConfig, build_problem, parse_config
from .eikonal import solve_eikonal
from .grid import BoundaryMap, GridSpec, build_grid
from .hughes import Trajectory, hughes_step, simulate_hughes
from .mfg import ControlState, DescentReport, solve_mfg
from .params import ModelParams

__all__ = [
    "BoundaryMap",
    "ControlState",
    "DescentReport",
    "GridSpec",
    "ModelParams",
    "SimConfig",
    "Trajectory",
    "build_grid",
    "build_problem",
    "compare_models",
    "hughes_step",
    "parse_config",
    "simulate_hughes",
    "solve_eikonal",
    "solve_mfg",
]
