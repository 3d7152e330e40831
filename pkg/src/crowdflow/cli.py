"""Command line entry point ``crowdflow``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import center_cross_section, compare_models
from .config import SimConfig, build_problem, dump_config, parse_config
from .eikonal import solve_eikonal
from .errors import ConfigError, CrowdflowError, OutputError
from .hughes import Trajectory, simulate_hughes
from .io import read_snapshot, snapshot_name, write_json, write_series, write_snapshot
from .mfg import ControlState, DescentReport, solve_mfg
from .plotting import figure_script

log = logging.getLogger("crowdflow")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 6

EPILOG = """\
exit codes:
  0  success
  2  usage error (unknown subcommand or bad arguments)
  3  configuration error (missing file, malformed JSON, unknown key, invalid value)
  4  solver error (negative density, NaN, Eikonal non-convergence)
  5  I/O error while reading or writing data files
  6  validate: at least one oracle check failed

environment:
  CROWDFLOW_THREADS  worker threads for `compare` (default 1); output does not depend on it
"""


def threads_from_env() -> int:
    raw = os.environ.get("CROWDFLOW_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CROWDFLOW_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"CROWDFLOW_THREADS must be a positive integer, got {raw!r}")
    return n


def _run_hughes(cfg: SimConfig) -> tuple[Trajectory, tuple]:
    grid, bmap, rho0, params = build_problem(cfg, "hughes")
    return simulate_hughes(rho0, grid, bmap, params), (grid, bmap, params)


def _run_mfg(cfg: SimConfig) -> tuple[tuple[ControlState, DescentReport], tuple]:
    grid, bmap, rho0, params = build_problem(cfg, "mfg")

    def progress(k, cost, gnorm):
        if k % 50 == 0:
            log.info("mfg iteration %d: cost %.10g, grad norm %.3e", k, cost, gnorm)

    return solve_mfg(rho0, grid, bmap, params, callback=progress), (grid, bmap, params)


def _mkdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {path}: {exc}") from exc
    return path


def dump_hughes(traj: Trajectory, grid, cfg: SimConfig, outdir: Path) -> None:
    _mkdir(outdir)
    fields = cfg.output.fields
    for t, rho, phi in zip(traj.times, traj.rho_snapshots, traj.phi_snapshots):
        if "rho" in fields:
            write_snapshot(rho, grid, outdir / snapshot_name("rho", t))
        if "phi" in fields:
            write_snapshot(phi, grid, outdir / snapshot_name("phi", t))
        if grid.dim == 2:
            write_series(outdir / snapshot_name("rho_center", t), {"x": grid.coords(0), "value": center_cross_section(rho, grid)})
    write_series(outdir / "mass.csv", {"t": traj.step_times, "mass": traj.mass_series})
    write_json(
        outdir / "metrics.json",
        {
            "model": "hughes",
            "snapshot_times": traj.times,
            "mass_initial": traj.mass_series[0],
            "mass_final": traj.mass_series[-1],
            "outflow_total": float(np.sum(traj.outflow_series)),
            "eikonal_passes_max": max(traj.eikonal_passes),
            "center_density": traj.center_series,
        },
    )


def dump_mfg(state: ControlState, report: DescentReport, grid, params, cfg: SimConfig, outdir: Path) -> None:
    _mkdir(outdir)
    fields = cfg.output.fields
    steps = params.snapshot_steps()
    for n in steps:
        t = n * params.dt
        if "rho" in fields:
            write_snapshot(state.rho[n], grid, outdir / snapshot_name("rho", t))
        if "phi" in fields:
            write_snapshot(state.phi[n], grid, outdir / snapshot_name("phi", t))
        if "m" in fields and n < len(state.m):
            write_snapshot(state.m[n], grid, outdir / snapshot_name("m", t))
        if grid.dim == 2:
            write_series(outdir / snapshot_name("rho_center", t), {"x": grid.coords(0), "value": center_cross_section(state.rho[n], grid)})
    mass = state.mass_series(grid)
    write_series(outdir / "mass.csv", {"t": state.times, "mass": mass})
    write_json(
        outdir / "metrics.json",
        {
            "model": "mfg",
            "snapshot_times": [n * params.dt for n in steps],
            "iterations": report.iterations,
            "termination": report.termination,
            "cost_history": report.cost_history,
            "grad_norm_history": report.grad_norm_history,
            "step_sizes": report.step_sizes,
            "line_search_evaluations": report.line_search_evaluations,
            "final_cost": state.cost,
            "final_grad_norm": state.grad_norm,
            "mass_initial": mass[0],
            "mass_final": mass[-1],
        },
    )


def cmd_hughes(cfg: SimConfig, out: Path) -> int:
    traj, (grid, _, _) = _run_hughes(cfg)
    dump_hughes(traj, grid, cfg, out / "hughes")
    return EXIT_OK


def cmd_mfg(cfg: SimConfig, out: Path) -> int:
    (state, report), (grid, _, params) = _run_mfg(cfg)
    dump_mfg(state, report, grid, params, cfg, out / "mfg")
    log.info("mfg finished: %s after %d iterations, grad norm %.3e", report.termination, report.iterations, state.grad_norm)
    return EXIT_OK


def cmd_compare(cfg: SimConfig, out: Path) -> int:
    threads = threads_from_env()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fh = pool.submit(_run_hughes, cfg)
            fm = pool.submit(_run_mfg, cfg)
            traj, (grid, _, _) = fh.result()
            (state, report), (_, _, mparams) = fm.result()
    else:
        traj, (grid, _, _) = _run_hughes(cfg)
        (state, report), (_, _, mparams) = _run_mfg(cfg)
    dump_hughes(traj, grid, cfg, out / "hughes")
    dump_mfg(state, report, grid, mparams, cfg, out / "mfg")
    comparison = compare_models(
        traj,
        state,
        grid,
        mparams,
        evacuation_threshold=cfg.analysis.evacuation_threshold,
        equilibration_window=tuple(cfg.analysis.equilibration_window),
    )
    payload = comparison.to_dict()
    payload["mfg_descent"] = {
        "iterations": report.iterations,
        "termination": report.termination,
        "final_cost": state.cost,
        "final_grad_norm": state.grad_norm,
    }
    write_json(out / "report.json", payload)
    try:
        (out / "figures.gp").write_text(figure_script(grid.dim, traj.times))
        dump_config(cfg, out / "config.json")
    except OSError as exc:
        raise OutputError(f"cannot write to {out}: {exc}") from exc
    return EXIT_OK


def cmd_eikonal(cfg: SimConfig, out: Path, density: str | None) -> int:
    grid, bmap, rho0, params = build_problem(cfg, "hughes")
    rho = read_snapshot(density, grid) if density else rho0
    sol = solve_eikonal(rho, grid, bmap, params)
    _mkdir(out)
    write_snapshot(sol.phi, grid, out / "phi.csv")
    write_json(out / "eikonal.json", {"iterations": sol.iterations, "residual": sol.residual})
    return EXIT_OK


def cmd_validate(out: Path | None) -> int:
    from .validation import run_checks

    results = run_checks()
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("validate:", "all checks passed" if ok else "FAILED")
    if out is not None:
        _mkdir(out)
        write_json(out / "validate.json", {r.name: {"value": r.value, "tolerance": r.tolerance, "passed": r.passed} for r in results})
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdflow",
        description="Hughes and mean-field-game pedestrian evacuation solvers",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{hughes,mfg,compare,eikonal,validate}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (default: built-in 1D experiment)")
    common.add_argument("--out", help="output directory (default: output.directory from the config)")
    common.add_argument(
        "--override", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override one config value (JSON literal)"
    )
    common.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("hughes", parents=[common], help="run the Hughes model")
    sub.add_parser("mfg", parents=[common], help="run the MFG steepest descent")
    sub.add_parser("compare", parents=[common], help="run both models and write the comparison report")
    p = sub.add_parser("eikonal", parents=[common], help="solve one Eikonal problem")
    p.add_argument("--density", help="density CSV (default: the configured initial density)")
    p = sub.add_parser("validate", help="run the built-in oracle checks")
    p.add_argument("--out", help="also write validate.json here")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("crowdflow: error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "validate":
            return cmd_validate(Path(args.out) if args.out else None)
        cfg = parse_config(args.config, args.override)
        out = Path(args.out or cfg.output.directory)
        if args.command == "hughes":
            return cmd_hughes(cfg, out)
        if args.command == "mfg":
            return cmd_mfg(cfg, out)
        if args.command == "compare":
            return cmd_compare(cfg, out)
        return cmd_eikonal(cfg, out, args.density)
    except CrowdflowError as exc:
        category = getattr(exc, "category", type(exc).__name__)
        print(f"crowdflow: {type(exc).__name__} [{category}]: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
