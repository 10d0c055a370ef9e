from .donsker import DonskerDelta, brownian_delta, s_delta, s_scaled_delta, t_delta, t_scaled_delta
from .products import DeltaProduct, ProductFactor, gram, s_product, s_product_oracle
from .series import DeltaSeries, ThetaArgs, partial_sum, s_series, theta
from .local_time import LocalTimeQuery, occupation_oracle, s_local_time
from .circle import (
    CircleState,
    WavePacket,
    feynman_integral,
    localized_divergence_check,
    schroedinger_residual,
    t_circle,
    t_free_integrand,
)

__all__ = [
    "DonskerDelta",
    "brownian_delta",
    "s_delta",
    "t_delta",
    "s_scaled_delta",
    "t_scaled_delta",
    "DeltaProduct",
    "ProductFactor",
    "gram",
    "s_product",
    "s_product_oracle",
    "DeltaSeries",
    "ThetaArgs",
    "theta",
    "s_series",
    "partial_sum",
    "LocalTimeQuery",
    "s_local_time",
    "occupation_oracle",
    "WavePacket",
    "CircleState",
    "t_free_integrand",
    "t_circle",
    "feynman_integral",
    "schroedinger_residual",
    "localized_divergence_check",
]
