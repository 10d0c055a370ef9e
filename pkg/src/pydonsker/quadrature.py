"""
Adaptive quadrature front end.

Every integral in the toolkit goes through `integrate_complex`, a thin layer
over `scipy.integrate.quad_vec` that integrates real and imaginary parts
together and turns an unreachable tolerance into `QuadratureFailure`.
"""

import math
import logging
from typing import Callable

import numpy as np
from scipy import integrate

from .config import QuadratureSpec
from .exception import QuadratureFailure

logger = logging.getLogger("pydonsker")

# quad_vec may stop at its subdivision limit while already close to the target
_TOLERANCE_GRACE = 10.0


def integrate_complex(
    func: Callable[[float], complex | np.ndarray],
    lower: float,
    upper: float,
    spec: QuadratureSpec,
) -> complex | np.ndarray:
    """
    Integrate a complex scalar or complex vector valued function.

    Args:
        func (Callable): Integrand, called with a real abscissa
        lower (float): Lower limit (may be -inf)
        upper (float): Upper limit (may be inf)
        spec (QuadratureSpec): Tolerances, subdivision limit, break points

    Returns:
        complex | np.ndarray: The integral, same shape as func's output

    Raises:
        QuadratureFailure: If the result is not finite or the error estimate
            stays above the requested tolerance
    """
    if lower == upper:
        sample = np.asarray(func(lower))
        return complex(0.0) if sample.ndim == 0 else np.zeros_like(sample, dtype=complex)

    def stacked(x: float) -> np.ndarray:
        value = np.asarray(func(x), dtype=complex)
        return np.stack([value.real, value.imag])

    points = None
    if spec.points and math.isfinite(lower) and math.isfinite(upper):
        inside = [p for p in spec.points if min(lower, upper) < p < max(lower, upper)]
        points = inside or None

    result, error, info = integrate.quad_vec(
        stacked,
        lower,
        upper,
        epsabs=spec.epsabs,
        epsrel=spec.epsrel,
        limit=spec.limit,
        points=points,
        full_output=True,
    )

    if not np.all(np.isfinite(result)):
        logger.error("Quadrature on [%s, %s] produced a non-finite value", lower, upper)
        raise QuadratureFailure(
            "quadrature produced a non-finite value",
            {"lower": lower, "upper": upper},
        )

    target = max(spec.epsabs, spec.epsrel * float(np.linalg.norm(result)))
    if not info.success:
        if error > _TOLERANCE_GRACE * target:
            logger.error(
                "Quadrature on [%s, %s] failed: %s (error %.3e > %.3e)",
                lower,
                upper,
                info.message,
                error,
                target,
            )
            raise QuadratureFailure(
                f"tolerance unreachable within budget: {info.message}",
                {"lower": lower, "upper": upper, "error": float(error)},
            )
        logger.warning(
            "Quadrature on [%s, %s] stopped early with error %.3e", lower, upper, error
        )

    logger.debug(
        "Quadrature on [%s, %s]: %s evaluations, error %.3e",
        lower,
        upper,
        info.neval,
        error,
    )

    value = result[0] + 1j * result[1]
    return complex(value) if np.ndim(value) == 0 else value
