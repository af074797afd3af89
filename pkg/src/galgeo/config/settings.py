from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical defaults and runtime knobs, loaded from environment or .env file."""

    log_level: str = "INFO"

    # check / sampling
    check_points: int = 100
    check_seed: int = 0
    check_tolerance: float = 1e-6
    sample_box: float = 1.0
    max_rejections: int = 1000
    max_dimension: int = 8
    workers: int = 4

    # numerics
    fd_step: float = 1e-5
    pivot_ratio: float = 1e-12
    condition_limit: float = 1e12
    drift_limit: float = 1e-8
    blowup_threshold: float = 1e12

    # output
    float_format: str = "%.17g"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="GALGEO_",
        extra="ignore",
    )


settings = Settings()
