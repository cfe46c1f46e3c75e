from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    Global configuration for mahler-core.

    Values are read from environment variables (prefix ``MAHLER_``), with
    defaults that reproduce the reference runs.
    """

    log_level: str = "WARNING"

    # Run defaults (echoed into every report through RunConfig)
    seed: int = 0
    samples: int = 200_000
    workers: int = 1
    shard_size: int = 65_536

    # Sampled checks
    containment_directions: int = 1000
    pointwise_samples: int = 10_000
    identity_points: int = 1000

    # Tolerances
    containment_tol: float = 1e-7
    identity_tol: float = 1e-12
    volume_identity_tol: float = 1e-9

    # Ellipsoid machinery
    khachiyan_eps: float = 1e-7
    khachiyan_max_iter: int = 100_000
    boundary_samples: int = 512

    # Numeric dual gauge
    dual_gauge_starts: int = 16
    dual_gauge_tol: float = 1e-8

    # Chain verification
    max_chain_dim: int = 4
    max_chain_levels: int = 20
    mc_cross_check_max_dim: int = 8

    # Rejection sampling guard above dimension 8
    min_acceptance: float = 1e-3

    class Config:
        env_prefix = "MAHLER_"
        case_sensitive = False


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return a cached Settings instance."""
    return Settings()
