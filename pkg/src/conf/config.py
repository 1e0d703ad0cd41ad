from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # basis / support
    BASIS_K_MAX: int = 25
    SUPPORT_R: float = 0.125
    SUPPORT_R_MIN: float = 0.0

    # linear algebra
    CONDITION_LIMIT: float = 1e12

    # quadrature
    SENSITIVITY_NODES: int = 512
    INTEGRAL_NODES: int = 256
    ISE_NODES: int = 256
    ANGULAR_NODES: int = 64
    INTENSITY_GRID_SIZE: int = 32

    # output
    CURVE_POINTS: int = 200

    # kernel estimator
    KDE_GRID_POINTS: int = 20
    KDE_GRID_LOW: float = 0.1
    KDE_GRID_HIGH: float = 2.0
    KDE_CV: str = "least-squares"

    # benchmark
    BENCH_REPLICATES: int = 500
    BENCH_CI_REPLICATES: int = 100
    BENCH_WORKERS: int = 1
    OUTLIER_RATIO: float = 0.2

    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", case_sensitive=True, extra="ignore"
    )


settings = Settings()
