import logging
from .config import ToolkitConfig, get_config, set_config
from .functions import hermite_basis, indicator, inner_product, norm, zero
from .ufunctional import UFunctional, check_sequence, verify_growth_bound
from .transforms import (
    DeltaSeries,
    DonskerDelta,
    LocalTimeQuery,
    WavePacket,
    s_delta,
    s_local_time,
    s_product,
    s_scaled_delta,
    s_series,
)


def enable_logging(level: str = "INFO") -> None:
    """
    Enable logging for the pydonsker library.

    Args:
        level (str): The logging level. Options: DEBUG, INFO, WARNING, ERROR, CRITICAL
    """
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


__all__ = [
    "ToolkitConfig",
    "get_config",
    "set_config",
    "zero",
    "indicator",
    "hermite_basis",
    "inner_product",
    "norm",
    "UFunctional",
    "verify_growth_bound",
    "check_sequence",
    "DonskerDelta",
    "DeltaSeries",
    "LocalTimeQuery",
    "WavePacket",
    "s_delta",
    "s_scaled_delta",
    "s_product",
    "s_series",
    "s_local_time",
    "enable_logging",
]
