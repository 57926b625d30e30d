"""Command-line entry point.

Subcommands: `run <config>` integrates and persists a full experiment,
`check <config>` evaluates the convergence diagnostics without integrating,
`pe <run-dir>` recomputes the excitation scan of a finished run.

Exit codes: 0 success, 2 configuration problem, 3 numeric or integrator
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import load_config, validate_config
from .errors import ConfigError, NumericError
from .experiment import build_plant, run_experiment, run_pe_analysis
from .grid import build_circle_grid
from .observer import ObserverGains, gain_condition
from .plant import dissipativity_margin


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldobs",
        description="Simulate a two-population field and reconstruct its "
        "unknown interaction kernels with an online observer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment to t_final")
    p_run.add_argument("config", help="path to a key-value config file")
    p_run.add_argument("--output-dir", help="override output.dir from the config")
    p_run.add_argument(
        "--t-final",
        type=float,
        help="override integration.t_final (snapshots beyond it are dropped)",
    )
    p_run.add_argument("--quiet", action="store_true", help="suppress progress output")

    p_check = sub.add_parser(
        "check", help="evaluate convergence diagnostics only, no integration"
    )
    p_check.add_argument("config", help="path to a key-value config file")
    p_check.add_argument("--quiet", action="store_true", help="suppress progress output")

    p_pe = sub.add_parser(
        "pe", help="recompute the excitation scan from a finished run directory"
    )
    p_pe.add_argument("run_dir", help="output directory of a completed run")
    p_pe.add_argument("--quiet", action="store_true", help="suppress progress output")

    return parser


def _apply_overrides(cfg, args):
    if args.output_dir is not None:
        cfg = replace(cfg, output_dir=args.output_dir)
    if args.t_final is not None:
        cfg = cfg.with_t_final(args.t_final)
        validate_config(cfg)
    return cfg


def _cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    summary = run_experiment(cfg)
    f = summary.final
    print(f"status: {summary.status}")
    print(f"steps: {summary.n_accepted} accepted, {summary.n_rejected} rejected")
    print(
        f"final t={f.t:g}: e_z1={f.e_z1:.6g} e_z2={f.e_z2:.6g} "
        f"e_W21={f.e_W21:.6g} e_W22={f.e_W22:.6g}"
    )
    print(f"outputs in {summary.output_dir}: {len(summary.outputs)} files")
    return 0


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    grid = build_circle_grid(n_points=cfg.grid.n_points, length=cfg.grid.length)
    params = build_plant(cfg, grid)
    gains = ObserverGains(cfg.gains.beta, cfg.gains.gamma1, cfg.gains.gamma2)
    diss = dissipativity_margin(params, grid)
    print(f"dissipativity: product={diss.product:.6g} satisfied={diss.satisfied}")
    if diss.satisfied:
        print(f"contraction rate alpha={diss.alpha:.6g}")
    report = gain_condition(params, gains, grid)
    if report.b1_opnorm is not None:
        print(
            f"gain condition: lhs={report.lhs:.6g} rhs={report.rhs:.6g} "
            f"holds={report.holds}"
        )
    if report.holds:
        print(
            f"decay constants: epsilon={report.epsilon:.6g} "
            f"mu1={report.mu1:.6g} mu2={report.mu2:.6g}"
        )
    return 0


def _cmd_pe(args) -> int:
    rows = run_pe_analysis(args.run_dir)
    if rows.shape[0] == 0:
        print("stored trajectory shorter than one window; empty scan written")
    else:
        worst = rows[:, 1].min()
        print(f"scan: {rows.shape[0]} windows, smallest margin {worst:.6g}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    handlers = {"run": _cmd_run, "check": _cmd_check, "pe": _cmd_pe}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
