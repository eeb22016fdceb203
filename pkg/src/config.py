"""Configuration management for the EcNet detector."""

import os
from dotenv import load_dotenv
from functools import lru_cache

# Load environment variables
load_dotenv()


class Settings:
    """Runtime settings loaded from environment variables."""

    # Logging
    LOG_LEVEL: str = os.getenv("ECNET_LOG_LEVEL", "INFO").upper()

    # Output settings
    OUTPUT_DIR: str = os.getenv("ECNET_OUTPUT_DIR", "runs")
    FIXED_TIMESTAMP: str = os.getenv("ECNET_FIXED_TIMESTAMP", "")

    # Seeds (sampling/splits, parameter init, training order)
    SEED_SAMPLING: int = int(os.getenv("ECNET_SEED_SAMPLING", "0"))
    SEED_INIT: int = int(os.getenv("ECNET_SEED_INIT", "1"))
    SEED_TRAINING: int = int(os.getenv("ECNET_SEED_TRAINING", "2"))

    # Parallelism for multi-file ingest and ablation runs
    WORKERS: int = int(os.getenv("ECNET_WORKERS", "1"))

    @property
    def has_fixed_timestamp(self) -> bool:
        """Check if report timestamps are pinned for reproducible artifacts."""
        return bool(self.FIXED_TIMESTAMP)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
