"""Tests for configuration validation."""

from __future__ import annotations

import pytest
from pydantic import ValidationError

from oscex.config import Settings, load_settings


def test_defaults() -> None:
    settings = Settings(_env_file=None)
    assert settings.diagnostic_tol == 1e-11
    assert settings.log_level == "WARNING"
    assert settings.compare_concurrency == 4
    assert settings.output_format == "csv"


def test_env_overrides() -> None:
    settings = Settings(
        OSCEX_TOL=1e-8,
        OSCEX_LOG_LEVEL="debug",
        OSCEX_COMPARE_CONCURRENCY=2,
        OSCEX_OUTPUT_FORMAT="JSONL",
        _env_file=None,
    )
    assert settings.diagnostic_tol == 1e-8
    assert settings.log_level == "DEBUG"
    assert settings.compare_concurrency == 2
    assert settings.output_format == "jsonl"


def test_env_variable_is_read(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("OSCEX_TOL", "2.5e-10")
    assert Settings(_env_file=None).diagnostic_tol == 2.5e-10


@pytest.mark.parametrize(
    "overrides",
    [
        {"OSCEX_TOL": 0.0},
        {"OSCEX_TOL": -1e-9},
        {"OSCEX_LOG_LEVEL": "chatty"},
        {"OSCEX_COMPARE_CONCURRENCY": 0},
        {"OSCEX_COMPARE_CONCURRENCY": 64},
        {"OSCEX_OUTPUT_FORMAT": "xml"},
    ],
)
def test_invalid_values_rejected(overrides: dict) -> None:
    with pytest.raises(ValidationError):
        Settings(_env_file=None, **overrides)


def test_load_settings_wraps_validation_errors(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("OSCEX_TOL", "not-a-number")
    load_settings.cache_clear()
    try:
        with pytest.raises(RuntimeError, match="Invalid configuration"):
            load_settings()
    finally:
        load_settings.cache_clear()
