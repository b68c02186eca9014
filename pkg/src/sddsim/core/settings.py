from __future__ import annotations

from pydantic_settings import (  # type: ignore[import-not-found]
    BaseSettings,
    SettingsConfigDict,
)


class Settings(BaseSettings):
    """
    Process settings.

    Loads from `SDD_*` environment variables and an optional local `.env`.
    Only process-level knobs live here; nothing that changes simulation
    output. Experiment parameters come exclusively from the TOML config
    (see `sddsim.harness.schemas.ExperimentConfig`).
    """

    model_config = SettingsConfigDict(
        env_prefix="SDD_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    LOG_LEVEL: str = "INFO"

    # Intra-op threads for torch. One keeps float64 reductions bit-stable
    # across machines; sweep-level parallelism lives in the harness.
    TORCH_NUM_THREADS: int = 1

    # Log a training line every N steps.
    TRAIN_LOG_EVERY: int = 500


settings = Settings()
