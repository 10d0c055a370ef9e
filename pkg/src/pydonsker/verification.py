"""
Randomized verification suites run by `pydonsker verify`.

Trial i of every suite draws its inputs from its own counter-based
substream, so a report depends only on (suite, trials, seed).
"""

import cmath
import math
import logging
from typing import Callable

import numpy as np

from .config import ToolkitConfig
from .enums import RandomStream
from .functions import Sector, indicator, sector_contains
from .schema import SuiteReport
from .transforms.donsker import (
    DonskerDelta,
    brownian_delta,
    homogeneous_partner,
    s_delta,
    s_scaled_delta,
    scaled_delta_ufunctional,
    t_delta,
)
from .transforms.series import DeltaSeries, partial_sum, s_series, tail_bound
from .types import SuiteLiteral
from .ufunctional import probe_generator, random_probe, s_from_t, verify_growth_bound

logger = logging.getLogger("pydonsker")

HOMOGENEITY_TOLERANCE = 1e-12
ROUNDTRIP_TOLERANCE = 1e-12
# keeps random scalings away from the sector boundary
ANGLE_INSET = 0.05


def _sector_point(rng: np.random.Generator, inset: float = ANGLE_INSET) -> complex:
    angle = rng.uniform(-math.pi / 4 + inset, math.pi / 4 - inset)
    return cmath.rect(math.exp(rng.uniform(math.log(0.5), math.log(2.0))), angle)


def _complex_normal(rng: np.random.Generator, scale: float = 1.0) -> complex:
    return complex(*(scale * rng.standard_normal(2)))


def _relative_error(left: complex, right: complex) -> float:
    return abs(left - right) / max(1.0, abs(right))


def _run(
    suite: SuiteLiteral,
    trial: Callable[[np.random.Generator], float],
    tolerance: float,
    trials: int,
    seed: int,
) -> SuiteReport:
    errors = [trial(probe_generator(seed, i, RandomStream.probes)) for i in range(trials)]
    violations = sum(1 for error in errors if not error <= tolerance)
    return SuiteReport(
        suite=suite,
        trials=trials,
        seed=seed,
        violations=violations,
        max_error=max(errors),
        verdict=violations == 0,
    )


def homogeneity_suite(trials: int = 1000, seed: int = 0) -> SuiteReport:
    """S sigma_z delta(xi) against (1/z) S delta_{a/z}(xi) for random z in S_0, a, xi."""
    eta = indicator(1.0)

    def trial(rng: np.random.Generator) -> float:
        d = DonskerDelta(eta=eta, a=_complex_normal(rng, 0.5), z=_sector_point(rng))
        xi = random_probe(rng, 4).scaled(0.5)
        return _relative_error(
            s_scaled_delta(d, xi), s_scaled_delta(homogeneous_partner(d), xi) / d.z
        )

    return _run("homogeneity", trial, HOMOGENEITY_TOLERANCE, trials, seed)


def roundtrip_suite(trials: int = 1000, seed: int = 0) -> SuiteReport:
    """S delta(xi) = C(xi) T delta(-i xi) on random (t, a, xi)."""

    def trial(rng: np.random.Generator) -> float:
        t = float(rng.uniform(0.25, 2.0))
        a = _complex_normal(rng, 0.5)
        xi = random_probe(rng, 4).scaled(0.5)
        return _relative_error(s_from_t(lambda x: t_delta(t, a, x), xi), s_delta(t, a, xi))

    return _run("roundtrip", trial, ROUNDTRIP_TOLERANCE, trials, seed)


def sector_suite(trials: int = 1000, seed: int = 0) -> SuiteReport:
    """Re(1/z^2) > 0 exactly when z lies in S_0, for z uniform in a box."""

    def trial(rng: np.random.Generator) -> float:
        z = _complex_normal(rng, 2.0)
        return float(((1.0 / z**2).real > 0) != sector_contains(Sector(), z))

    return _run("sector", trial, 0.0, trials, seed)


def series_suite(trials: int = 200, seed: int = 0) -> SuiteReport:
    """The theta form against partial sums at N in {5, 10, 20}, within the tail bound."""

    def trial(rng: np.random.Generator) -> float:
        d = DeltaSeries(
            z=_sector_point(rng, 0.2), t=float(rng.uniform(0.25, 2.0)), a=_complex_normal(rng, 0.5)
        )
        xi = random_probe(rng, 4).scaled(0.3)
        full = s_series(d, xi)
        excess = 0.0
        for N in (5, 10, 20):
            gap = abs(full - partial_sum(d.base, N, xi).value)
            excess = max(excess, gap - tail_bound(d, xi, N) - 1e-12 * max(1.0, abs(full)))
        return max(excess, 0.0)

    return _run("series", trial, 0.0, trials, seed)


def growth_suite(trials: int = 1000, seed: int = 0, config: ToolkitConfig | None = None) -> SuiteReport:
    """Certified bound of S delta(B(1) - 0.5) on random probes."""
    report = verify_growth_bound(
        scaled_delta_ufunctional(brownian_delta(1.0, 0.5)), trials=trials, seed=seed, config=config
    )
    return SuiteReport(
        suite="growth",
        trials=trials,
        seed=seed,
        violations=report.bound_violations,
        max_error=0.0,
        verdict=report.verdict,
    )


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "homogeneity": homogeneity_suite,
    "growth": growth_suite,
    "roundtrip": roundtrip_suite,
    "sector": sector_suite,
    "series": series_suite,
}


def run_suite(suite: SuiteLiteral, trials: int, seed: int) -> SuiteReport:
    logger.info("Running %s suite: %s trials, seed %s", suite, trials, seed)
    report = SUITES[suite](trials=trials, seed=seed)
    logger.info("Suite %s: %s violations", suite, report.violations)
    return report
