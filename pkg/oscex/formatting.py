"""Shared formatting helpers for errors, drifts and timings."""

from __future__ import annotations

from typing import Optional


def format_error(value: Optional[float]) -> str:
    """Format an error or drift magnitude.

    Returns ``"N/A"`` for *None*, ``"0"`` for exact zeros and scientific
    notation otherwise, so values spanning many decades line up.
    """
    if value is None:
        return "N/A"
    if value == 0:
        return "0"
    return f"{value:.3e}"


def format_order(value: Optional[float]) -> str:
    """Format an observed convergence order; round-off rows show a dash."""
    if value is None:
        return "-"
    return f"{value:.2f}"


def format_duration(seconds: Optional[float]) -> str:
    """Format wall time with ms/s units."""
    if seconds is None:
        return "N/A"
    if seconds < 1.0:
        return f"{seconds * 1000:.1f} ms"
    return f"{seconds:.2f} s"


def format_flag(value: Optional[bool]) -> str:
    if value is None:
        return "n/a"
    return "yes" if value else "NO"
