from functools import lru_cache
from typing import Dict, List

from pydantic import field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # App settings
    APP_NAME: str = "parcap"
    APP_VERSION: str = "0.1.0"
    APP_DESCRIPTION: str = "Capacitary estimates for u_t - Δu + u^q = 0"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Output and cache locations
    PARCAP_CACHE: str = ".parcap_cache.json"
    OUTPUT_DIR: str = "runs"

    # Geometry
    GEOMETRY_EPS: float = 1e-12  # relative to the box diameter

    # Capacity solver
    CAPACITY_GRID_SPACING: float = 1.0 / 32.0
    CAPACITY_MIN_SPACING: float = 1.0 / 512.0
    CAPACITY_BESSEL_MASS: float = 1.0 / 32.0
    CAPACITY_MARGIN_FACTOR: float = 1.0
    CAPACITY_TOLERANCE: float = 1e-8
    CAPACITY_MAX_ITER: int = 50_000
    POTENTIAL_MIN_SPACING: float = 1.0 / 256.0
    POTENTIAL_CAPACITY_TOLERANCE: float = 1e-6

    # Quadrature
    QUADRATURE_TOLERANCE: float = 1e-12
    ORACLE_QUADRATURE_TOLERANCE: float = 1e-10
    KERNEL_GRID_SAMPLES: int = 1000
    W_INTEGRAL_NODES: int = 64
    SERIES_TAIL_TOLERANCE: float = 1e-4

    # PDE solver
    NEWTON_MAX_ITER: int = 50
    K_LIST: List[float] = [1e2, 1e4, 1e6, 1e8]

    # Classifier policy
    CLASSIFIER_SPREAD: float = 0.05
    CLASSIFIER_WINDOW: int = 3

    # Reproducibility
    SWEEP_VERSION: str = "v1"
    GOLDEN_RTOL: float = 1e-6
    GOLDEN_FIELD_RTOL: Dict[str, float] = {}  # field name -> rtol, JSON in the environment
    SEED: int = 20240101

    @field_validator("LOG_LEVEL")
    def normalize_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level {v}")
        return level

    @field_validator("K_LIST")
    def check_k_list(cls, v: List[float]) -> List[float]:
        if not v or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("K_LIST must be a nonempty increasing list")
        return v

    @field_validator("GOLDEN_FIELD_RTOL")
    def check_field_rtol(cls, v: Dict[str, float]) -> Dict[str, float]:
        bad = {name: rtol for name, rtol in v.items() if not rtol >= 0.0}
        if bad:
            raise ValueError(f"Field tolerances must be nonnegative: {bad}")
        return v

    class Config:
        env_file = ".env"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    return Settings()
