"""
Hybrid OMA/NOMA Aggregation Analysis
Command-line entry point
"""
import argparse
import logging
import os
import sys
from typing import Optional, Sequence

# Add repo root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.analysis.laplace import LaplaceVariant
from src.cli.commands import (
    DEFAULT_S_DB,
    run_analytic,
    run_delta_star,
    run_laplace,
    run_pmf,
    run_simulate,
    run_success,
    write_table,
)
from src.cli.figures import FIGURE_IDS, run_figure
from src.cli.scenario import load_scenario
from src.utils.config import configure_logging, get_config
from src.utils.errors import AccuracyError, DomainError, ScenarioError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

COMMANDS = ("pmf", "laplace", "success", "metrics", "delta-star", "simulate", "figure")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid_mtc",
        description="Analytic and simulated metrics of hybrid OMA/NOMA uplink aggregation networks",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=str, default=None, help="Path to scenario YAML")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a scenario key (section.key or bare key); repeatable")
    common.add_argument("--seed", type=int, default=None, help="Simulation seed")
    common.add_argument("--out", type=str, default=None, help="Output directory")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="Output format")
    common.add_argument("--workers", type=int, default=None, help="Concurrent sweep points / simulation processes")
    common.add_argument("--variant", choices=[v.value for v in LaplaceVariant], default=None,
                        help="Interference transform variant")

    commands = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[common])
        if name == "laplace":
            sub.add_argument("--s-db", type=float, nargs="+", default=None, help="Laplace arguments in dB")
        if name == "figure":
            sub.add_argument("--id", dest="fig_id", choices=FIGURE_IDS, required=True, help="Figure to reproduce")
            sub.add_argument("--points", type=int, default=None, help="Grid resolution per curve")
            sub.add_argument("--runs", type=int, default=0, help="Monte Carlo runs per point (0: analytic only)")
    return parser


def _execute(args: argparse.Namespace) -> int:
    settings = get_config()
    workers = args.workers if args.workers is not None else settings.WORKERS
    overrides = list(args.overrides)
    if args.format:
        overrides.append(f"output.format={args.format}")
    scenario = load_scenario(args.scenario, overrides, seed=args.seed, workers=workers)
    out_dir = args.out or scenario.output_dir or settings.OUTPUT_DIR
    fmt = scenario.output_format
    header = scenario.describe()

    if args.command == "figure":
        point = scenario.points()[0]
        star = scenario.network.get("delta") == "star"
        curves = run_figure(args.fig_id, point.params, point.simulation, args.points, args.runs, workers, star_delta=star)
        header = {**header, "figure": args.fig_id, "points": args.points, "runs": args.runs}
        for curve in curves:
            write_table(curve.frame, os.path.join(out_dir, f"fig{args.fig_id}"), curve.name, fmt,
                        {**header, "x": curve.x_label})
        return EXIT_OK

    variant = LaplaceVariant(args.variant) if args.variant else None
    if args.command == "pmf":
        frame = run_pmf(scenario, workers)
    elif args.command == "laplace":
        s_db = args.s_db or DEFAULT_S_DB
        variants = [variant] if variant else [LaplaceVariant.RRS_UPPER, LaplaceVariant.RRS_LOWER, LaplaceVariant.RRS_WEIGHTED]
        frame = run_laplace(scenario, variants, s_db, workers)
    elif args.command == "success":
        frame = run_success(scenario, variant or LaplaceVariant.RRS_WEIGHTED, workers)
    elif args.command == "metrics":
        frame = run_analytic(scenario, variant or LaplaceVariant.RRS_WEIGHTED, workers=workers)
    elif args.command == "delta-star":
        frame = run_delta_star(scenario, workers)
    else:
        frame = run_simulate(scenario)

    write_table(frame, out_dir, args.command.replace("-", "_"), fmt, header)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_config()
    configure_logging(settings.LOG_LEVEL, settings.LOG_FILE)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logger.info(f"Starting '{args.command}'")
    try:
        code = _execute(args)
    except ScenarioError as e:
        logger.error(f"Scenario error: {e}")
        return EXIT_USAGE
    except (DomainError, AccuracyError) as e:
        logger.error(f"Numerical error: {e}")
        return EXIT_NUMERIC
    logger.info(f"Finished '{args.command}'")
    return code


if __name__ == "__main__":
    sys.exit(main())
