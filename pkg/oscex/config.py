"""Application configuration management."""

from __future__ import annotations

from functools import lru_cache

from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from oscex.types import DEFAULT_DIAGNOSTIC_TOLERANCE

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
_OUTPUT_FORMATS = ("csv", "jsonl")


class Settings(BaseSettings):
    """Runtime configuration loaded from environment or `.env`."""

    model_config = SettingsConfigDict(
        env_file=(".env",),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Tolerance applied to energy drift when summarising a run
    diagnostic_tol: float = Field(
        default=DEFAULT_DIAGNOSTIC_TOLERANCE, alias="OSCEX_TOL", gt=0.0, le=1.0
    )

    log_level: str = Field(default="WARNING", alias="OSCEX_LOG_LEVEL")

    compare_concurrency: int = Field(
        default=4, alias="OSCEX_COMPARE_CONCURRENCY", ge=1, le=32
    )

    output_format: str = Field(default="csv", alias="OSCEX_OUTPUT_FORMAT")

    @model_validator(mode="after")
    def _normalize_choices(self) -> "Settings":
        """Upper-case the log level and validate the enumerated settings."""
        self.log_level = self.log_level.strip().upper()
        if self.log_level not in _LOG_LEVELS:
            raise ValueError(
                f"OSCEX_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}"
            )
        self.output_format = self.output_format.strip().lower()
        if self.output_format not in _OUTPUT_FORMATS:
            raise ValueError(
                f"OSCEX_OUTPUT_FORMAT must be one of {', '.join(_OUTPUT_FORMATS)}"
            )
        return self


@lru_cache(maxsize=1)
def load_settings() -> Settings:
    """Return cached Settings instance, raising a helpful message on failure."""
    try:
        return Settings()
    except ValidationError as exc:
        raise RuntimeError(f"Invalid configuration: {exc}") from exc


__all__ = ["Settings", "load_settings"]
