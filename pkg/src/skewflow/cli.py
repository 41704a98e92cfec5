"""Command-line entry point: ``skewflow run | sweep | verify | plot``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import verify as verify_mod
from .config import ExperimentConfig, fit_loglog_slope, load_config, preset_names
from .diagnostics import diagnostics_table, duality_gap_of_averages, total_regret, verify_identities
from .dynamics import run
from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DomainError,
    MissingColumnError,
    TrajectoryOverflowError,
    UnsupportedError,
)
from .report import write_reports_csv, write_sweep_csv, write_trajectory_csv
from .svgplot import emit_svg

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (TrajectoryOverflowError, ConvergenceError, FloatingPointError)
CONFIG_ERRORS = (ConfigError, DimensionError, DomainError, UnsupportedError)

log = logging.getLogger("skewflow")


def out_dir(default: str | None) -> Path:
    d = Path(os.environ.get("SKEWFLOW_OUT_DIR") or default or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fmt_opt(v) -> str:
    return "n/a" if v is None else f"{v:.10g}"


def execute(cfg: ExperimentConfig, steps: int | None = None):
    """Run one experiment; returns (trajectory, eta note)."""
    steps = cfg.steps if steps is None else steps
    game = cfg.build_game()
    start = cfg.initial_state(game)
    eta, note = cfg.resolve_eta(game, steps, start)
    traj = run(game, cfg.scheme_spec(eta), start, steps)
    traj.meta.update(name=cfg.name, eta_note=note)
    return traj, note


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    traj, note = execute(cfg)
    dest = out_dir(args.out_dir)
    table = diagnostics_table(traj)
    if traj.game.bounded:
        rk, dg = total_regret(traj), duality_gap_of_averages(traj)
    else:
        rk, dg = float(table["total_regret"][-1]), None
    written = []
    if "trajectory_csv" in cfg.outputs or "svg_plot" in cfg.outputs:
        csv_path = write_trajectory_csv(traj, dest / f"{cfg.name}.csv")
        written.append(csv_path)
        if "svg_plot" in cfg.outputs:
            written.append(emit_svg(csv_path, dest / f"{cfg.name}.svg"))
    if "diagnostics_csv" in cfg.outputs:
        written.append(write_reports_csv(verify_identities(traj, cfg.name), dest / f"{cfg.name}_diagnostics.csv"))
    print(
        f"{cfg.name}: scheme={cfg.scheme.value} K={traj.steps} {note} "
        f"H={table['energy'][-1]:.10g} H_eta={table['modified_energy'][-1]:.10g} "
        f"R_K={rk:.10g} dg={_fmt_opt(dg)}"
    )
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not cfg.sweep_steps:
        raise ConfigError(f"{args.config}: sweep needs a 'sweep_steps' list")
    rows, note = [], ""
    for K in cfg.sweep_steps:
        traj, note = execute(cfg, steps=K)
        rows.append((K, traj.eta, duality_gap_of_averages(traj), total_regret(traj)))
        print(f"K={K} eta={traj.eta:.6g} dg={rows[-1][2]:.6e} R_K={rows[-1][3]:.6e}")
    slope = fit_loglog_slope([r[0] for r in rows], [r[2] for r in rows])
    path = write_sweep_csv(rows, out_dir(args.out_dir) / f"{cfg.name}_sweep.csv")
    print(f"{cfg.name}: step rule {note.split(', ', 1)[-1]}")
    print(f"fitted log-log slope of dg vs K: {slope:.4f}")
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_verify(args) -> int:
    reports = verify_mod.run_matrix(corrupt_step=args.corrupt_step)
    print(verify_mod.format_table(reports))
    failed = sorted({r.bound_name for r in reports if not r.satisfied})
    if failed:
        print("FAILED: " + ", ".join(failed))
        return EXIT_FAIL
    return EXIT_OK


def cmd_plot(args) -> int:
    csv_path = Path(args.csv)
    if not csv_path.is_file():
        raise ConfigError(f"no such CSV file: {csv_path}")
    path = emit_svg(csv_path, args.out)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewflow", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log written files")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file or preset")
    p_run.add_argument("config", help=f"JSON file or preset name ({', '.join(preset_names())})")
    p_run.add_argument("--out-dir", default=None, help="output directory (env SKEWFLOW_OUT_DIR wins)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep the horizon K and fit the duality-gap rate")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out-dir", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the built-in verification matrix")
    p_verify.add_argument("--corrupt-step", type=int, default=None, help=argparse.SUPPRESS)
    p_verify.set_defaults(func=cmd_verify)

    p_plot = sub.add_parser("plot", help="render a trajectory CSV as a two-panel SVG")
    p_plot.add_argument("csv")
    p_plot.add_argument("--out", default=None, help="output SVG path (default: next to the CSV)")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (*CONFIG_ERRORS, MissingColumnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
