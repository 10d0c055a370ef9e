import os
import logging

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger("pydonsker")

WORKERS_ENV = "PYDONSKER_WORKERS"
SEED_BLOCK_ENV = "PYDONSKER_SEED_BLOCK"


class QuadratureSpec(BaseModel):
    """
    Tolerances and subdivision budget for one adaptive quadrature.

    Attributes:
        epsabs (float): Requested absolute error
        epsrel (float): Requested relative error
        limit (int): Maximum number of subintervals
        points (tuple[float, ...]): Interior break points
    """

    model_config = ConfigDict(frozen=True)

    epsabs: float = 1e-10
    epsrel: float = 1e-10
    limit: int = 2000
    points: tuple[float, ...] = ()


class ToolkitConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    workers: int = Field(default=1, ge=1)

    # Monte Carlo: samples per RNG block, paths per block, jackknife groups
    seed_block: int = Field(default=16384, ge=1)
    path_block: int = Field(default=256, ge=1)
    jackknife_blocks: int = Field(default=100, ge=2)

    # probe distribution for the growth-bound checkers
    probe_max_length: int = Field(default=16, ge=1)
    probe_min_scale: float = 1e-2
    probe_max_scale: float = 8.0
    minimal_type_epsilons: tuple[float, ...] = (1.0, 0.1, 0.01)
    bound_slack: float = 1e-12

    # Cauchy checker: gaps at or below the floor count as converged
    gap_floor: float = 1e-9
    settle_index: int = Field(default=0, ge=0)

    sector_margin: float = 1e-12

    inner_product_quadrature: QuadratureSpec = QuadratureSpec(
        epsabs=1e-12, epsrel=0.0
    )
    approximant_quadrature: QuadratureSpec = QuadratureSpec(
        epsabs=1e-10, epsrel=0.0, points=(0.0,)
    )
    family_quadrature: QuadratureSpec = QuadratureSpec(epsabs=1e-12, epsrel=1e-12)

    @classmethod
    def from_env(cls) -> "ToolkitConfig":
        """
        Build a configuration, taking overrides from the environment.

        Returns:
            ToolkitConfig: Defaults with PYDONSKER_WORKERS / PYDONSKER_SEED_BLOCK applied
        """
        overrides: dict = {}

        if WORKERS_ENV in os.environ:
            overrides["workers"] = int(os.environ[WORKERS_ENV])

        if SEED_BLOCK_ENV in os.environ:
            overrides["seed_block"] = int(os.environ[SEED_BLOCK_ENV])

        if overrides:
            logger.debug("Configuration overrides from environment: %s", overrides)

        return cls(**overrides)


_default_config: ToolkitConfig | None = None


def get_config() -> ToolkitConfig:
    """Return the process-wide default configuration."""
    global _default_config

    if _default_config is None:
        _default_config = ToolkitConfig.from_env()

    return _default_config


def set_config(config: ToolkitConfig | None) -> None:
    """Replace the process-wide default (None re-reads the environment)."""
    global _default_config
    _default_config = config
