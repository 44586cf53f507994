from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal

class Settings(BaseSettings):
    APP_ENV: str = "dev"
    LOG_LEVEL: str = "INFO"
    SEED: int = 1234
    MAX_QUBITS: int = 12
    OMEGA_VARIANT: Literal["exact", "paper", "cube-root"] = "exact"
    RESTARTS: int = 32
    MAX_EVALS: int = 5000
    THREADS: int = 1
    PRNG_ALGORITHM: str = "PCG64"
    RESULTS_DIR: str = "results"

    model_config = SettingsConfigDict(
        env_prefix="ENTPOWER_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

# This creates a single global settings object
settings = Settings()
