from typing import List, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Environment
    ENV: str = "development"
    DEBUG: bool = False

    # Execution
    THREADS: int = Field(default=1, ge=1, le=64)  # HOMASCEND_THREADS
    SEED: int = 0
    TIMEOUT_SECS: Optional[float] = None  # None = unbounded

    # Homological ranges
    EXT_RANGE: int = Field(default=5, ge=0, le=32)

    # Search bounds
    SEARCH_DIM_CAP: int = 12  # exhaustive retract/idempotent enumeration
    ISO_TRIALS: int = 64  # seeded random Hom combinations per isomorphism test
    EXHAUSTIVE_LIMIT: int = 4096  # grid points before falling back to sampling
    IDEMPOTENT_SEARCH_DIM: int = 6
    BRUTE_FORCE_DIM_CAP: int = 8
    BRUTE_FORCE_CANDIDATES: int = 200_000  # candidate modules per oracle run
    SCALAR_GRID: List[int] = [-2, -1, 0, 1, 2]

    # PID model
    PID_PRECISION: int = Field(default=16, ge=1)

    # Gallery parameter bounds
    GALLERY_MAX_TRUNCATION: int = 8
    GALLERY_MAX_PRIME: int = 7

    # Service Configuration
    SERVICE_NAME: str = "homascend"
    SERVICE_VERSION: str = "1.0.0"

    model_config = SettingsConfigDict(
        env_prefix="HOMASCEND_",
        env_file=".env",
        extra="ignore",
    )


settings = Settings()
