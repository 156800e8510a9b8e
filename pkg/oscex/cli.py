"""CLI interface for oscex."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from oscex import __version__
from oscex.config import Settings, load_settings
from oscex.output import CLIOutput, OutputFormat
from oscex.runconfig import load_run_config
from oscex.runner import compare, run
from oscex.serialize import FORMATS, serialize, write_trajectory
from oscex.types import ConfigError, NumericalError, ReferenceKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

TESTS_DIR = Path(__file__).resolve().parent.parent / "tests"


def _parse_sweep(value: str) -> List[float]:
    """Parse ``eps1,eps2,...`` into floats."""
    try:
        sweep = [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sweep '{value}': expected comma-separated numbers")
    if any(e <= 0 for e in sweep):
        raise argparse.ArgumentTypeError("sweep step sizes must be positive")
    return sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscex",
        description="oscex - exact discretizations of harmonic oscillators",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m oscex run configs/osc1d_exact.json --out traj.csv
  python -m oscex run configs/kepler.json --format jsonl > orbit.jsonl
  python -m oscex compare configs/osc1d_exponential_euler.json configs/osc1d_lawson.json --reference analytic --sweep 0.1,0.05,0.025,0.0125
  python -m oscex selftest

Environment:
  OSCEX_TOL                   diagnostic tolerance for energy drift (default 1e-11)
  OSCEX_LOG_LEVEL             DEBUG, INFO, WARNING or ERROR (default WARNING)
  OSCEX_COMPARE_CONCURRENCY   concurrent runs inside compare (default 4)
  OSCEX_OUTPUT_FORMAT         default trajectory format, csv or jsonl

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
        """,
    )
    parser.add_argument("--version", action="version", version=f"oscex {__version__}")
    parser.add_argument(
        "-o", "--output",
        choices=["text", "json", "table"],
        default="table",
        help="Summary and table format (default: table)",
    )
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Show debug information",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Run one configuration")
    run_parser.add_argument("config", help="Run configuration JSON file")
    run_parser.add_argument("--out", help="Write the trajectory here instead of stdout")
    run_parser.add_argument(
        "--format",
        choices=list(FORMATS),
        default=None,
        help="Trajectory format (default: OSCEX_OUTPUT_FORMAT or csv)",
    )

    compare_parser = sub.add_parser("compare", help="Compare configurations against a reference")
    compare_parser.add_argument("configs", nargs="+", help="Run configuration JSON files")
    compare_parser.add_argument(
        "--reference",
        choices=[kind.value for kind in ReferenceKind],
        default=ReferenceKind.ANALYTIC.value,
        help="Reference trajectory (default: analytic)",
    )
    compare_parser.add_argument(
        "--sweep",
        type=_parse_sweep,
        default=None,
        help="Comma-separated step sizes for the convergence-order fit (at least 4)",
    )

    sub.add_parser("selftest", help="Run the test suite")
    return parser


def configure_logging(level: str, verbose: bool) -> None:
    """Route library logging through rich on stderr."""
    from rich.console import Console
    from rich.logging import RichHandler

    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, level, logging.WARNING),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[handler],
        force=True,
    )


async def _cmd_run(args: argparse.Namespace, settings: Settings, output: CLIOutput) -> int:
    config = load_run_config(args.config)
    fmt = args.format or settings.output_format
    with output.processing(f"Running {config.stepper.label}..."):
        result = run(config, settings)

    if "trajectory" in config.outputs:
        if args.out:
            path = write_trajectory(result.trajectory, args.out, fmt)
            output.status(f"Trajectory written to {path}")
        else:
            sys.stdout.buffer.write(serialize(result.trajectory, fmt))
            sys.stdout.flush()
    if "summary" in config.outputs:
        output.summary(result.summary)
    return EXIT_OK


async def _cmd_compare(args: argparse.Namespace, settings: Settings, output: CLIOutput) -> int:
    configs = [load_run_config(path) for path in args.configs]

    def log_callback(level: str, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        if level == "error":
            output.error(message)
        elif level == "warning":
            output.warning(message)
        elif level == "info":
            output.info(message)
        else:
            output.debug(message, data)

    table = await compare(
        configs,
        reference=ReferenceKind(args.reference),
        sweep=args.sweep,
        log_callback=log_callback,
        settings=settings,
    )
    output.comparison(table)
    return EXIT_OK


def _cmd_selftest(output: CLIOutput) -> int:
    import pytest

    if not TESTS_DIR.is_dir():
        raise OSError(f"test suite not found at {TESTS_DIR}")
    output.status(f"Running test suite in {TESTS_DIR}")
    return int(pytest.main([str(TESTS_DIR), "-q"]))


async def async_main(argv: Optional[Sequence[str]] = None) -> int:
    """Async CLI entrypoint; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        output_format = OutputFormat(args.output)
    except ValueError:
        output_format = OutputFormat.TABLE
    # Trajectories on stdout keep the summary off it
    stream = sys.stderr if args.command == "run" and not getattr(args, "out", None) else None
    output = CLIOutput(format=output_format, verbose=args.verbose, stream=stream)

    try:
        settings = load_settings()
    except RuntimeError as exc:
        output.error(f"Failed to load settings: {exc}")
        return EXIT_CONFIG
    configure_logging(settings.log_level, args.verbose)

    try:
        if args.command == "run":
            return await _cmd_run(args, settings, output)
        if args.command == "compare":
            return await _cmd_compare(args, settings, output)
        return _cmd_selftest(output)
    except (ConfigError, ValidationError) as exc:
        output.error(str(exc))
        return EXIT_CONFIG
    except NumericalError as exc:
        output.error(f"Numerical failure: {exc}")
        return EXIT_NUMERICAL
    except OSError as exc:
        output.error(str(exc))
        return EXIT_IO
    except ValueError as exc:
        output.error(str(exc))
        return EXIT_CONFIG


def main() -> None:
    """Synchronous wrapper for CLI entry."""
    sys.exit(asyncio.run(async_main()))


if __name__ == "__main__":
    main()
