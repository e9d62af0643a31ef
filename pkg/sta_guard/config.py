"""
Configuration file for STA Guard.
Manages settings for the service, the numerical engine and the CLI outputs.
"""
from typing import List
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Application settings
    app_name: str = "STA Guard"
    version: str = "1.0.0"
    api_v1_prefix: str = "/api/v1"
    debug: bool = False

    # Server settings
    host: str = "0.0.0.0"
    port: int = 8000

    # Quadrature settings (dimensionless units)
    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-12
    quad_max_panels: int = 200000
    quad_min_panels: int = 64

    # Scheme validation
    validation_grid: int = 4097
    boundary_tol: float = 1e-12
    tan_singularity_threshold: float = 1e8
    divergence_threshold: float = 1e9  # |Omega| * T

    # Propagator settings
    propagator_method: str = "magnus4"
    propagator_tol: float = 1e-12
    propagator_min_steps: int = 512
    propagator_phase_cap: float = 0.1  # max ||H|| * h per step

    # Optimization settings
    opt_starts: int = 16
    opt_max_evaluations: int = 2000
    opt_seed: int = 0
    opt_xatol: float = 1e-8

    # Output settings
    csv_samples: int = 1001
    output_dir: str = "./results"

    # CORS settings
    cors_origins: List[str] = ["*"]  # Configure this for production

    # Logging
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="STA_",
        env_file=".env",
        case_sensitive=False,
    )


# Global settings instance
settings = Settings()
