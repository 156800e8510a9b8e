"""CLI output formatting with table support."""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from enum import Enum
from typing import Any, Dict, Generator, Optional

from oscex.formatting import format_duration, format_error, format_flag, format_order
from oscex.runner import ComparisonTable, RunSummary


class OutputFormat(Enum):
    """Supported output formats."""

    TEXT = "text"
    JSON = "json"
    TABLE = "table"


class CLIOutput:
    """Unified output handler for CLI."""

    def __init__(
        self,
        format: OutputFormat = OutputFormat.TABLE,
        verbose: bool = False,
        stream: Any = None,
    ) -> None:
        self.format = format
        self.verbose = verbose
        self.stream = stream or sys.stdout
        self.__console: Optional[Any] = None

        # Verify rich is available when table output is requested
        if format == OutputFormat.TABLE:
            try:
                from rich.console import Console  # noqa: F401
            except ImportError:
                self.format = OutputFormat.TEXT
                print("'rich' library not installed, using text output", file=sys.stderr)

    @property
    def _console(self) -> Any:
        """Lazy-initialise the Rich Console on first access."""
        if self.__console is None:
            from rich.console import Console
            self.__console = Console(file=self.stream)
        return self.__console

    # ------------------------------------------------------------------
    # Run summaries
    # ------------------------------------------------------------------

    def summary(self, summary: RunSummary) -> None:
        """Output the summary record of one run."""
        if self.format == OutputFormat.JSON:
            print(json.dumps(summary.to_dict(), indent=2), file=self.stream)
        elif self.format == OutputFormat.TABLE:
            self._table_summary(summary)
        else:
            self._text_summary(summary)

    def _text_summary(self, summary: RunSummary) -> None:
        print(f"{summary.problem} / {summary.stepper}: {summary.steps} steps", file=self.stream)
        print(f"  final time   {summary.final_time:.17g}", file=self.stream)
        for name, value in summary.final_state.items():
            print(f"  {name:<12} {value:.17g}", file=self.stream)
        for name, value in summary.energy_drift.items():
            print(f"  drift {name:<6} {format_error(value)}", file=self.stream)
        print(f"  within tol   {format_flag(summary.within_tolerance)}", file=self.stream)
        print(f"  wall time    {format_duration(summary.wall_time)}", file=self.stream)
        if summary.continuations:
            print(f"  continuations {summary.continuations}", file=self.stream)

    def _table_summary(self, summary: RunSummary) -> None:
        from rich.table import Table

        table = Table(title=f"{summary.problem} / {summary.stepper}", show_header=False)
        table.add_column("Field", style="cyan")
        table.add_column("Value", overflow="fold")
        table.add_row("steps", str(summary.steps))
        table.add_row("final time", f"{summary.final_time:.17g}")
        for name, value in summary.final_state.items():
            table.add_row(name, f"{value:.17g}")
        for name, value in summary.energy_drift.items():
            table.add_row(f"drift {name}", format_error(value))
        style = "green" if summary.within_tolerance else "yellow"
        table.add_row("within tolerance", f"[{style}]{format_flag(summary.within_tolerance)}[/{style}]")
        table.add_row("wall time", format_duration(summary.wall_time))
        if summary.continuations:
            table.add_row("hyperbolic continuations", str(summary.continuations))
        self._console.print(table)

    # ------------------------------------------------------------------
    # Comparison tables
    # ------------------------------------------------------------------

    def comparison(self, table: ComparisonTable) -> None:
        """Output a comparison table."""
        if self.format == OutputFormat.JSON:
            print(json.dumps(table.to_dict(), indent=2), file=self.stream)
        elif self.format == OutputFormat.TABLE:
            self._table_comparison(table)
        else:
            self._text_comparison(table)

    def _text_comparison(self, table: ComparisonTable) -> None:
        print(
            f"{table.problem} vs {table.reference} reference, horizon {table.horizon:g}",
            file=self.stream,
        )
        print(f"{'stepper':<32} {'error':>12} {'drift':>12} {'order':>7}", file=self.stream)
        for row in table.rows:
            print(
                f"{row.label:<32} {format_error(row.global_error):>12} "
                f"{format_error(row.energy_drift):>12} {format_order(row.observed_order):>7}",
                file=self.stream,
            )

    def _table_comparison(self, table: ComparisonTable) -> None:
        from rich.table import Table

        rich_table = Table(
            title=f"{table.problem} vs {table.reference} reference (horizon {table.horizon:g})",
            header_style="bold cyan",
        )
        rich_table.add_column("Stepper", style="green")
        rich_table.add_column("Steps", justify="right")
        rich_table.add_column("Global error", justify="right")
        rich_table.add_column("Energy drift", justify="right")
        rich_table.add_column("Order", justify="right")
        for row in table.rows:
            rich_table.add_row(
                row.label,
                str(row.steps),
                format_error(row.global_error),
                format_error(row.energy_drift),
                format_order(row.observed_order),
            )
        self._console.print(rich_table)

        if self.verbose:
            for row in table.rows:
                if not row.sweep:
                    continue
                title = f"Sweep: {row.label}"
                sweep = Table(title=title, min_width=len(title) + 4)
                sweep.add_column("eps", justify="right")
                sweep.add_column("error", justify="right")
                for point in row.sweep:
                    sweep.add_row(f"{point['eps']:g}", format_error(point["error"]))
                self._console.print(sweep)

    # ------------------------------------------------------------------
    # Messages
    # ------------------------------------------------------------------

    @contextmanager
    def processing(self, message: str = "Running...") -> Generator[None, None, None]:
        """Show animated spinner while processing."""
        if self.format != OutputFormat.TABLE:
            yield
            return

        with self._console.status(f"[bold cyan]{message}[/bold cyan]", spinner="dots"):
            yield

    def status(self, message: str) -> None:
        """Output a status message."""
        if self.format == OutputFormat.JSON:
            return
        if self.format == OutputFormat.TABLE:
            self._console.print(f"[dim]{message}[/dim]")
        else:
            print(message, file=sys.stderr)

    def info(self, message: str) -> None:
        """Output an info message."""
        if self.format == OutputFormat.JSON:
            return
        if self.format == OutputFormat.TABLE:
            self._console.print(f"[blue]{message}[/blue]")
        else:
            print(message, file=sys.stderr)

    def debug(self, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        """Output a debug message (only in verbose mode)."""
        if not self.verbose:
            return
        if self.format == OutputFormat.JSON:
            output: Dict[str, Any] = {"debug": message}
            if data:
                output["data"] = data
            print(json.dumps(output, default=str), file=sys.stderr)
            return
        print(f"[debug] {message}", file=sys.stderr)
        if data:
            print(f"        {json.dumps(data, default=str)}", file=sys.stderr)

    def warning(self, message: str) -> None:
        """Output a warning message."""
        if self.format == OutputFormat.JSON:
            print(json.dumps({"warning": message}), file=sys.stderr)
            return
        print(f"warning: {message}", file=sys.stderr)

    def error(self, message: str) -> None:
        """Output an error message."""
        if self.format == OutputFormat.JSON:
            print(json.dumps({"error": message}), file=sys.stderr)
            return
        print(f"error: {message}", file=sys.stderr)
