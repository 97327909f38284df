#!/usr/bin/env python3
"""CLI entry point for schurlab experiment suites."""

import argparse
import logging
import math
import os
import shutil
import sys
from pathlib import Path

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .core.errors import ConfigError, ReportIOError, SchurLabError, UnknownSuiteError
from .core.reports import emit_report, load_report
from .core.suites import SUITES, run_suite
from .models.config import SuiteConfig, parse_exponent
from .models.report import ExperimentReport

console = Console()

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_IO = 3


def get_default_config_path() -> Path:
    """The documented default configuration shipped with the package."""
    return Path(__file__).parent / "config.yaml"


def setup_logging(level: str | None) -> None:
    """Route library logging through rich on stderr."""
    name = (level or os.getenv("SCHURLAB_LOG_LEVEL") or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.WARNING),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def build_config(args: argparse.Namespace) -> SuiteConfig:
    """Defaults < config file < environment < command-line flags."""
    config_path = args.config or os.getenv("SCHURLAB_CONFIG")
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config not found: {path}")
        config = SuiteConfig.load(path)
    else:
        config = SuiteConfig()
    config.apply_environment()

    if args.suite is not None:
        config.suite = args.suite
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.output = args.out
    if args.format is not None:
        config.format = args.format
    if args.k_global is not None:
        config.k_global = args.k_global
    if args.trials is not None:
        config.trials = args.trials
    if args.n:
        config.n = args.n
    if args.d:
        config.d = args.d
    if args.p:
        config.p = args.p
    if args.workers is not None:
        config.workers = args.workers
    if args.samples is not None:
        config.samples = args.samples
    if args.strict_real:
        config.strict_real = True
    return config


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6g}"
    return "-" if value is None else str(value)


def print_summary(report: ExperimentReport, output: Path | None = None) -> None:
    table = Table(title=f"Suite {report.suite}")
    table.add_column("Key", style="cyan")
    table.add_column("Value")
    for key, value in report.summary.items():
        table.add_row(key, _fmt(value))
    if report.wall_time:
        table.add_row("wall time", f"{report.wall_time:.2f} s")
    if output is not None:
        table.add_row("report", str(output))
    console.print(table)


def cmd_run(args: argparse.Namespace) -> int:
    """Run one suite and write its report."""
    try:
        config = build_config(args)
        config.validate()
    except (ConfigError, UnknownSuiteError) as e:
        console.print(f"[red]Configuration error: {e}")
        return EXIT_USAGE

    if config.suite not in SUITES:
        console.print(f"[red]Unknown suite: {config.suite}")
        console.print(f"Available: {', '.join(sorted(SUITES))}")
        return EXIT_USAGE

    console.print(f"Running suite [bold]{config.suite}[/bold] (seed {config.seed})...", style="blue")
    try:
        report = run_suite(config)
    except SchurLabError as e:
        console.print(f"[red]Suite failed: {e}")
        return EXIT_USAGE

    output = Path(config.output or f"reports/{config.suite}.{config.format}")
    try:
        emit_report(report, output, config.format)
    except ReportIOError as e:
        console.print(f"[red]Could not write report: {e}")
        return EXIT_IO

    print_summary(report, output)
    if report.violations:
        console.print(f"[red]{report.violations} violation(s) found")
        return EXIT_VIOLATIONS
    console.print("[green]No violations")
    return EXIT_OK


def cmd_suites(args: argparse.Namespace) -> int:
    """List the registered suites."""
    table = Table(title="Suites")
    table.add_column("Name", style="cyan")
    table.add_column("Columns", style="blue")
    table.add_column("Description")
    for name in sorted(SUITES):
        spec = SUITES[name]
        table.add_row(name, ", ".join(spec.columns), spec.description)
    console.print(table)
    return EXIT_OK


def cmd_show(args: argparse.Namespace) -> int:
    """Print the summary of a saved JSON report."""
    try:
        report = load_report(Path(args.report))
    except ReportIOError as e:
        console.print(f"[red]{e}")
        return EXIT_IO
    console.print(f"[dim]{report.schema}, schurlab {report.tool_version}")
    print_summary(report)
    return EXIT_VIOLATIONS if report.violations else EXIT_OK


def cmd_init_config(args: argparse.Namespace) -> int:
    """Copy the documented default configuration to a file."""
    path = Path(args.path)
    if path.exists() and not args.force:
        console.print(f"[yellow]{path} exists (use --force to overwrite)")
        return EXIT_USAGE
    try:
        shutil.copyfile(get_default_config_path(), path)
    except OSError as e:
        console.print(f"[red]Could not write {path}: {e}")
        return EXIT_IO
    console.print(f"[green]Wrote {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = argparse.ArgumentParser(
        prog="schurlab",
        description="Numerical experiments on Schur multipliers and Riesz-Schur transforms",
    )
    parser.add_argument("--version", action="version", version=f"schurlab {__version__}")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING (default) or ERROR")
    parser.add_argument("--list-suites", action="store_true", help="List suites and exit")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # run command
    run_parser = subparsers.add_parser("run", help="Run an experiment suite")
    run_parser.add_argument("--suite", help="Suite name (see --list-suites)")
    run_parser.add_argument("--config", help="YAML or JSON config file (or SCHURLAB_CONFIG)")
    run_parser.add_argument("--seed", type=int, help="Master seed")
    run_parser.add_argument("--out", help="Report path (default: reports/<suite>.<format>)")
    run_parser.add_argument("--format", choices=["csv", "json"], help="Report format")
    run_parser.add_argument("--k-global", type=float, help="Global constant K")
    run_parser.add_argument("--trials", type=int, help="Trials per grid cell")
    run_parser.add_argument("--n", type=int, action="append", help="Index-set size (repeatable)")
    run_parser.add_argument("--d", type=int, action="append", help="Hilbert dimension (repeatable)")
    run_parser.add_argument("--p", type=parse_exponent, action="append", help="Exponent, e.g. 3, 4/3, inf (repeatable)")
    run_parser.add_argument("--workers", type=int, help="Parallel trial workers")
    run_parser.add_argument("--samples", type=int, help="Monte Carlo sample count N")
    run_parser.add_argument("--strict-real", action="store_true", help="Realify complex families")

    # suites command
    subparsers.add_parser("suites", help="List suites")

    # show command
    show_parser = subparsers.add_parser("show", help="Summarize a saved JSON report")
    show_parser.add_argument("report", help="Report file")

    # init-config command
    init_parser = subparsers.add_parser("init-config", help="Write the default configuration")
    init_parser.add_argument("path", nargs="?", default="schurlab.yaml", help="Destination file")
    init_parser.add_argument("--force", action="store_true", help="Overwrite an existing file")

    args = parser.parse_args(argv)
    load_dotenv()
    setup_logging(args.log_level)

    if args.list_suites or args.command == "suites":
        return cmd_suites(args)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "show":
        return cmd_show(args)
    if args.command == "init-config":
        return cmd_init_config(args)
    parser.print_help()
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
