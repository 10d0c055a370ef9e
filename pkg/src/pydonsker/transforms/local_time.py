"""
Brownian local time L(t, a) = int_0^t delta(B(s) - a) ds as a parameter
integral of Donsker deltas, and its occupation-time Monte Carlo oracle.
"""

import cmath
import math
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import special, stats

from ..config import QuadratureSpec, ToolkitConfig, get_config
from ..exception import DomainViolation, NonpositiveTime
from ..functions import FunctionElement, Sector, sector_contains
from ..oracle import OracleEstimate, iter_path_blocks, jackknife
from ..quadrature import integrate_complex
from ..ufunctional import ParameterFamily, integrate_family
from .donsker import s_delta

logger = logging.getLogger("pydonsker")

# below RECIPROCAL_FRACTION * t the s-integral is taken in u = 1/s
RECIPROCAL_FRACTION = 0.01


class LocalTimeQuery(BaseModel):
    """L(t, a), analytically continued to a in the sector S_0."""

    model_config = ConfigDict(frozen=True)

    t: float
    a: complex

    @model_validator(mode="after")
    def _check_domain(self) -> "LocalTimeQuery":
        if self.t <= 0:
            raise NonpositiveTime(f"time must be positive, got {self.t}")

        # S_0 is where Re(a^2) > 0 and Re(a) > 0
        if self.a == 0 or not sector_contains(Sector(), self.a):
            logger.error("Local time requested at a=%s outside S_0", self.a)
            raise DomainViolation(
                "local time needs a in S_0 (Re(a^2) > 0, Re(a) > 0)",
                {"a": [self.a.real, self.a.imag]},
            )
        return self


def local_time_family(a: complex) -> ParameterFamily:
    """
    s -> S delta(B(s) - a) with its declared bounds
    K1(s) = (2 pi s)^{-1/2} exp(-Re(a^2) / 2s) exp(|a|^2 / 2), K2(s) = 1.
    """
    decay = (a * a).real

    def k1(s: float) -> float:
        return math.exp(-decay / (2.0 * s) + abs(a) ** 2 / 2.0) / math.sqrt(2.0 * math.pi * s)

    return ParameterFamily(
        evaluator=lambda s, xi: s_delta(s, a, xi),
        k1=k1,
        k2=lambda s: 1.0,
    )


def s_local_time(
    q: LocalTimeQuery,
    xi: FunctionElement,
    tol: float | None = None,
    start: float = 0.0,
    config: ToolkitConfig | None = None,
) -> complex:
    """
    S-transform of the local time integrated over (start, t]:

    int_start^t (2 pi s)^{-1/2} exp(-(int_0^s xi - a)^2 / 2s) ds

    Args:
        q (LocalTimeQuery): t and a, a in S_0
        xi (FunctionElement): Test function
        tol (float, optional): Absolute quadrature tolerance
        start (float): Lower end of the time range, 0 <= start <= t
        config (ToolkitConfig, optional): Default tolerances

    Raises:
        QuadratureFailure: If the tolerance cannot be reached
    """
    config = config or get_config()
    if not 0 <= start <= q.t:
        raise ValueError(f"start must lie in [0, {q.t}], got {start}")
    if start == q.t:
        return 0j

    spec = config.family_quadrature if tol is None else QuadratureSpec(epsabs=tol, epsrel=0.0)
    cut = RECIPROCAL_FRACTION * q.t
    reciprocal_below = cut if start < cut else None

    logger.debug("Local time t=%s a=%s over (%s, %s]", q.t, q.a, start, q.t)
    return integrate_family(
        local_time_family(q.a), start, q.t, xi, spec, reciprocal_below=reciprocal_below
    )


def _expected_local_time(t: float, a: complex) -> complex:
    # even in a; band averages cross to negative levels
    root = cmath.sqrt(a * a)
    return complex(
        math.sqrt(2.0 * t / math.pi) * cmath.exp(-(a * a) / (2.0 * t))
        - root * special.erfc(root / math.sqrt(2.0 * t))
    )


def local_time_closed_form(t: float, a: complex) -> complex:
    """
    S L(t, a)(0) = sqrt(2t/pi) exp(-a^2/2t) - a erfc(a / sqrt(2t)), a in S_0.

    Raises:
        DomainViolation: If a lies outside S_0
    """
    q = LocalTimeQuery(t=t, a=a)
    return _expected_local_time(q.t, q.a)


def mollified_local_time(t: float, a: float, eps: float) -> float:
    """
    Expected band occupation E[|{s <= t : |B(s) - a| < eps}|] / (2 eps),
    the average of E L(t, x) over |x - a| < eps.
    """
    if t == 0:
        return 0.0

    spec = QuadratureSpec(epsabs=1e-13, epsrel=1e-12, points=(0.0,))
    total = integrate_complex(lambda x: _expected_local_time(t, x), a - eps, a + eps, spec)
    return float(total.real) / (2.0 * eps)


def occupation_bias_bound(t: float, a: float, eps: float, steps: int) -> float:
    """
    Declared bias of the occupation oracle against L(t, a).

    Band averaging costs at most eps^2/3 max_{|x-a|<=eps} p_t(x), since the
    second a-derivative of E L(t, a) is 2 p_t(a) away from 0. The Riemann sum
    on `steps` intervals costs at most 2 dt max_s g(s) for the unimodal
    g(s) = P(|B(s) - a| < eps) / (2 eps).
    """
    if t == 0:
        return 0.0

    nearest = min(max(0.0, a - eps), a + eps)
    band = eps**2 / 3.0 * float(stats.norm.pdf(nearest, scale=math.sqrt(t)))

    s = np.linspace(t / 1024, t, 1024)
    root = np.sqrt(s)
    g = (stats.norm.cdf((a + eps) / root) - stats.norm.cdf((a - eps) / root)) / (2.0 * eps)
    grid = 2.0 * (t / steps) * float(np.max(g))

    return band + grid


def occupation_oracle(
    t: float,
    a: float,
    eps: float,
    paths: int,
    steps: int,
    seed: int,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> OracleEstimate:
    """
    Occupation-time estimate of E L(t, a) for real a.

    Each path contributes dt * #{k : |B(t_k) - a| < eps} / (2 eps).

    Args:
        t (float): Horizon, t >= 0 (t = 0 gives 0 exactly)
        a (float): Level
        eps (float): Band half-width
        paths (int): Number of paths
        steps (int): Time steps per path
        seed (int): Seed
        workers (int, optional): Threads
        config (ToolkitConfig, optional): Block sizes

    Returns:
        OracleEstimate: estimate with jackknife standard error
    """
    if t < 0:
        raise NonpositiveTime(f"time must be non-negative, got {t}")
    if t == 0:
        return OracleEstimate(re=0.0, im=0.0, stderr=0.0)

    config = config or get_config()
    dt = t / steps
    logger.info(
        "Occupation oracle: t=%s a=%s eps=%s, %s paths x %s steps", t, a, eps, paths, steps
    )

    occupation = np.concatenate(
        [
            dt * np.count_nonzero(np.abs(block.values[:, 1:] - a) < eps, axis=1) / (2.0 * eps)
            for block in iter_path_blocks(t, steps, paths, seed, workers, config)
        ]
    )

    mean, stderr = jackknife(occupation, config.jackknife_blocks)
    return OracleEstimate(re=mean.real, im=0.0, stderr=stderr)
