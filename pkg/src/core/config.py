"""Configuration module for the application.

This module provides process-wide settings using Pydantic's BaseSettings.
It loads configuration from environment variables (prefix ``PROTODIV_``) and
provides default values. Experiment settings live in ``src.schemas``.
"""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings.

    Attributes:
        LOG_LEVEL: Logging level for the rich console handler.
        VERSION: Tool version written into every manifest.
        DEFAULT_SEED: Master seed used when neither config nor flag sets one.
        NUM_THREADS: Worker count for independent sweep cells.
        CHECKPOINT_FORMAT_VERSION: Version number written after the magic.
    """

    model_config = SettingsConfigDict(env_prefix="PROTODIV_")

    LOG_LEVEL: str = "INFO"

    VERSION: str = "0.1.0"
    DEFAULT_SEED: int = 0
    NUM_THREADS: int = 1
    CHECKPOINT_FORMAT_VERSION: int = 1


@lru_cache()
def get_settings() -> Settings:
    """Get application settings.

    Returns:
        Settings: Application settings instance.
    """
    return Settings()


settings = get_settings()
