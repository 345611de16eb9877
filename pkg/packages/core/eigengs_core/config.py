"""Configuration management using pydantic-settings."""

import logging
import os
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process-wide settings loaded from ``EIGENGS_*`` environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="EIGENGS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Parallelism
    threads: Optional[int] = Field(
        default=None,
        ge=1,
        description="Cap on worker threads for the tile kernels (EIGENGS_THREADS). Defaults to the CPU count.",
    )
    fit_workers: int = Field(
        default=1,
        ge=1,
        description="Images fine-tuned concurrently by `eigengs fit` (one process each)",
    )

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")

    @property
    def thread_count(self) -> int:
        """Resolved thread cap."""
        return self.threads or os.cpu_count() or 1


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get global settings instance."""
    return settings


def configure_threads(threads: Optional[int] = None) -> int:
    """
    Cap the numba thread pool used by the tile kernels.

    Args:
        threads: Requested thread count; falls back to the settings value

    Returns:
        The thread count actually applied
    """
    import numba

    requested = threads or settings.thread_count
    applied = max(1, min(requested, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(applied)
    logger.debug(f"Tile kernels limited to {applied} threads")
    return applied
