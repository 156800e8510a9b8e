"""Trajectory serialization to CSV and JSON lines.

Every float is written with 17 significant digits, so parsing the output
gives back bitwise-identical values.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from oscex.runner import Trajectory
from oscex.types import ConfigError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "jsonl")

_STATE_RE = re.compile(r"^[xv]\d+(_re|_im)?$")
_ENERGY_RE = re.compile(r"^(E\d|I|H|W\d+)$")


def _check_format(fmt: str) -> str:
    fmt = fmt.strip().lower()
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format '{fmt}' (choose from {', '.join(FORMATS)})")
    return fmt


def format_value(name: str, value: float) -> str:
    if name == "n":
        return str(int(value))
    return format(float(value), ".17g")


def _json_value(name: str, value: float) -> Union[int, float, None]:
    if name == "n":
        return int(value)
    value = float(value)
    # JSON has no nan/inf literals
    return value if np.isfinite(value) else None


def serialize(trajectory: Trajectory, fmt: str = "csv") -> bytes:
    """Render *trajectory* as CSV (header plus one line per row) or JSON lines."""
    fmt = _check_format(fmt)
    columns = trajectory.columns
    buffer = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in trajectory.data:
            writer.writerow([format_value(name, value) for name, value in zip(columns, row)])
    else:
        for row in trajectory.data:
            record = {name: _json_value(name, value) for name, value in zip(columns, row)}
            buffer.write(json.dumps(record))
            buffer.write("\n")
    return buffer.getvalue().encode("utf-8")


def _classify(columns: List[str]) -> Dict[str, List[str]]:
    groups: Dict[str, List[str]] = {"state": [], "energy": [], "extra": []}
    for name in columns:
        if name in ("n", "t"):
            continue
        if _STATE_RE.match(name):
            groups["state"].append(name)
        elif _ENERGY_RE.match(name):
            groups["energy"].append(name)
        else:
            groups["extra"].append(name)
    return groups


def parse(data: Union[bytes, str], fmt: str = "csv") -> Trajectory:
    """Inverse of :func:`serialize`."""
    fmt = _check_format(fmt)
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        try:
            columns = next(reader)
        except StopIteration:
            raise ValueError("empty CSV input") from None
        rows = [[float(cell) for cell in line] for line in reader if line]
    else:
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not records:
            raise ValueError("empty JSON-lines input")
        columns = list(records[0])
        rows = [
            [float("nan") if record[name] is None else float(record[name]) for name in columns]
            for record in records
        ]
    for i, row in enumerate(rows):
        if len(row) != len(columns):
            raise ValueError(f"row {i} has {len(row)} fields, expected {len(columns)}")
    groups = _classify(columns)
    return Trajectory(
        columns=columns,
        data=np.array(rows, dtype=float).reshape(len(rows), len(columns)),
        state_columns=groups["state"],
        energy_columns=groups["energy"],
        extra_columns=groups["extra"],
    )


def write_trajectory(trajectory: Trajectory, path: Union[str, Path], fmt: str = "csv") -> Path:
    """Serialize *trajectory* to *path*, creating parent directories."""
    payload = serialize(trajectory, fmt)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc.strerror or exc}") from exc
    logger.info("wrote %d rows to %s", len(trajectory), path)
    return path


__all__ = ["FORMATS", "format_value", "parse", "serialize", "write_trajectory"]
