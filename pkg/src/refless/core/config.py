"""Application configuration module."""

import logging
from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


DEFAULT_TOLERANCES: dict[str, float] = {
    "oracle": 1e-8,
    "masses": 1e-6,
    "point_mass": 1e-6,
    "endpoint_mass": 1e-4,
    "reflectionless": 1e-6,
    "herglotz": 0.0,
    "additivity": 1e-10,
    "roundtrip_mu": 1e-7,
    "roundtrip_norm": 1e-8,
    "roundtrip_g": 1e-6,
    "composition": 1e-9,
    "representative": 1e-7,
    "normal_form": 1e-7,
    "degeneration": 0.05,
    "free_jacobi": 1e-6,
    "twisted_shift": 1e-10,
    "twisted_shift_probe": 1e-3,
    "krein": 1e-3,
}


class Settings(BaseSettings):
    """Numerical defaults loaded from environment variables.

    Every value mirrors a tolerance or discretisation constant used by the
    services. Callers may always override them per call; these only apply when
    an argument is left as ``None``.
    """

    app_name: str = "reflectionless"
    log_level: str = "WARNING"

    # Herglotz metric and Laurent sampling
    metric_grid_n: int = 24
    laurent_samples: int = 512

    # Boundary values and extrapolation
    eps_ladder: tuple[float, ...] = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
    endpoint_snap: float = 1e-8
    pole_probe_eps: float = 1e-6

    # Inverse map
    band_samples: int = 48
    infinite_mu_threshold: float = 1e9
    fit_tolerance: float = 1e-7

    # Quadrature and moments
    quad_limit: int = 200
    hankel_cond_max: float = 1e10
    max_jacobi_k: int = 8

    # Check battery; 1.0 runs the full sample counts, REFLESS_SUITE_SCALE=0.1 a quick pass
    suite_scale: float = 1.0
    tolerances: dict[str, float] = Field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @field_validator("metric_grid_n")
    @classmethod
    def _validate_grid(cls, value: int) -> int:
        if value < 8:
            raise ValueError("METRIC_GRID_N must be at least 8.")
        return value

    @field_validator("laurent_samples")
    @classmethod
    def _validate_samples(cls, value: int) -> int:
        if value < 64 or value % 2:
            raise ValueError("LAURENT_SAMPLES must be an even number of at least 64.")
        return value

    @field_validator("eps_ladder")
    @classmethod
    def _validate_ladder(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if len(value) < 2:
            raise ValueError("EPS_LADDER needs at least two rungs.")
        if any(eps <= 0 for eps in value):
            raise ValueError("EPS_LADDER entries must be positive.")
        if any(later >= earlier for earlier, later in zip(value, value[1:])):
            raise ValueError("EPS_LADDER must be strictly decreasing.")
        return value

    @field_validator("suite_scale")
    @classmethod
    def _validate_scale(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("SUITE_SCALE must be positive.")
        return value

    @field_validator("tolerances")
    @classmethod
    def _merge_tolerances(cls, value: dict[str, float]) -> dict[str, float]:
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(value)
        return merged

    model_config = SettingsConfigDict(
        env_prefix="REFLESS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    """Return cached settings instance."""
    settings = Settings()
    logger.info("Settings loaded successfully")
    return settings
