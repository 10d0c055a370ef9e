"""
U-functionals: evaluation, the characteristic functional, the S <-> T
relation and numerical checkers for the growth, convergence, minimal-type and
parameter-integration criteria of the characterization theorem.
"""

import cmath
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat

from .config import QuadratureSpec, ToolkitConfig, get_config
from .enums import GrowthStyle, NormSign, RandomStream, TransformKind
from .exception import DomainViolation, QuadratureFailure
from .functions import (
    FunctionElement,
    HermiteSpan,
    NormSpec,
    hermite_basis,
    inner_product,
    norm,
)
from .quadrature import integrate_complex
from .types import GrowthStyleLiteral, TransformKindLiteral

logger = logging.getLogger("pydonsker")

# directions z in |F_n(z xi)| <= K1 exp(K2 |z|^2 |xi|^2) sampled by check_sequence
SEQUENCE_BOUND_SCALES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


class GrowthCertificate(BaseModel):
    """Claims |F(z xi)| <= K1 exp(K2 |z|^2 |xi|^2_norm) for all xi, z."""

    model_config = ConfigDict(frozen=True)

    K1: PositiveFloat
    K2: PositiveFloat
    norm: NormSpec = NormSpec()
    style: GrowthStyleLiteral = GrowthStyle.order_two

    def log_bound(self, scale: float, size: float) -> float:
        return math.log(self.K1) + self.K2 * scale**2 * size**2


class UFunctional(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    evaluator: Callable[[FunctionElement], complex]
    certificate: GrowthCertificate
    kind: TransformKindLiteral = TransformKind.s
    name: str = ""

    def __call__(self, xi: FunctionElement) -> complex:
        return complex(self.evaluator(xi))


class ConvergenceReport(BaseModel):
    cauchy_max_gap: float
    bound_violations: int
    verdict: bool
    trials: int = 0
    gaps: list[float] = Field(default_factory=list)
    violations_by_epsilon: dict[str, int] = Field(default_factory=dict)


# ----------------------- Closed forms
def characteristic_functional(xi: FunctionElement) -> complex:
    """C(xi) = exp(-1/2 (xi, xi)), the T-transform of the constant 1."""
    return cmath.exp(-0.5 * inner_product(xi, xi))


def characteristic_ufunctional() -> UFunctional:
    return UFunctional(
        evaluator=characteristic_functional,
        certificate=GrowthCertificate(K1=1.0, K2=0.5),
        kind=TransformKind.t,
        name="T1",
    )


def s_from_t(T: UFunctional | Callable[[FunctionElement], complex], xi: FunctionElement) -> complex:
    """
    S-transform from T-transform: S Phi(xi) = C(xi) T Phi(-i xi).

    Args:
        T (UFunctional | Callable): T-transform, defined on complex-scaled inputs
        xi (FunctionElement): Test function

    Returns:
        complex: S Phi(xi)
    """
    return characteristic_functional(xi) * complex(T(xi.scaled(-1j)))


# ----------------------- Probes
def probe_generator(seed: int, index: int, stream: int = RandomStream.probes) -> np.random.Generator:
    """Counter-based generator for probe `index`; independent of worker count."""
    sequence = np.random.SeedSequence(seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(sequence))


def random_probe(rng: np.random.Generator, max_length: int) -> HermiteSpan:
    """Hermite span with standard Gaussian coefficients and random length."""
    length = int(rng.integers(1, max_length + 1))
    return HermiteSpan.from_array(rng.standard_normal(length))


def _random_scale(rng: np.random.Generator, config: ToolkitConfig) -> complex:
    radius = math.exp(
        rng.uniform(math.log(config.probe_min_scale), math.log(config.probe_max_scale))
    )
    return cmath.rect(radius, rng.uniform(0.0, 2.0 * math.pi))


def _log_abs(value: complex) -> float:
    size = abs(value)
    return math.log(size) if size > 0 else -math.inf


def _exceeds(log_value: float, log_bound: float, slack: float) -> bool:
    return log_value > log_bound + slack * max(1.0, abs(log_bound))


def _growth_probe(
    F: UFunctional,
    cert: GrowthCertificate,
    seed: int,
    index: int,
    config: ToolkitConfig,
) -> tuple[bool, dict[float, bool]]:
    rng = probe_generator(seed, index)
    xi = random_probe(rng, config.probe_max_length)
    size = norm(xi, cert.norm)
    if size == 0:
        xi, size = hermite_basis(0), norm(hermite_basis(0), cert.norm)

    # unit probes keep exp(K2 |z|^2) inside double range
    xi = xi.scaled(1.0 / size)
    z = _random_scale(rng, config)
    log_value = _log_abs(F(xi.scaled(z)))

    violated = _exceeds(log_value, cert.log_bound(abs(z), 1.0), config.bound_slack)

    by_epsilon: dict[float, bool] = {}
    if cert.style == GrowthStyle.minimal_type:
        dual = norm(xi, NormSpec(p=cert.norm.p, sign=NormSign.dual))
        for eps in config.minimal_type_epsilons:
            log_bound = math.log(cert.K1) + eps * abs(z) ** 2 * dual**2
            by_epsilon[eps] = _exceeds(log_value, log_bound, config.bound_slack)

    return violated, by_epsilon


# ----------------------- Checkers
def verify_growth_bound(
    F: UFunctional,
    cert: GrowthCertificate | None = None,
    trials: int = 1000,
    seed: int = 0,
    config: ToolkitConfig | None = None,
) -> ConvergenceReport:
    """
    Falsify a growth certificate by sampling.

    Draws random Hermite spans (normalized in the certificate's norm) and
    complex scales z with |z| log-uniform, and counts violations of
    |F(z xi)| <= K1 exp(K2 |z|^2 |xi|^2). For minimal-type certificates the
    bound K1 exp(eps |z|^2 |xi|_{-p}^2) is tested for every configured eps as
    well; those counts are reported per eps and added to the total.

    Args:
        F (UFunctional): Functional under test
        cert (GrowthCertificate, optional): Defaults to F's own certificate
        trials (int): Number of probes
        seed (int): Seed; probe i uses its own substream
        config (ToolkitConfig, optional): Probe distribution and workers

    Returns:
        ConvergenceReport: violations and verdict (violations == 0)
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")

    config = config or get_config()
    cert = cert or F.certificate
    logger.info(
        "Verifying %s bound of %s: %s trials, seed %s", cert.style, F.name or "F", trials, seed
    )

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        outcomes = list(
            pool.map(lambda i: _growth_probe(F, cert, seed, i, config), range(trials))
        )

    violations = sum(1 for violated, _ in outcomes if violated)
    by_epsilon = {
        str(eps): sum(1 for _, flags in outcomes if flags.get(eps))
        for eps in (config.minimal_type_epsilons if cert.style == GrowthStyle.minimal_type else ())
    }
    total = violations + sum(by_epsilon.values())

    logger.debug("Growth check: %s order-two violations, by eps %s", violations, by_epsilon)
    return ConvergenceReport(
        cauchy_max_gap=0.0,
        bound_violations=total,
        verdict=total == 0,
        trials=trials,
        violations_by_epsilon=by_epsilon,
    )


def _gaps_settle(gaps: Sequence[float], floor: float) -> bool:
    if not gaps:
        return True

    for previous, current in zip(gaps, gaps[1:]):
        if not (current < previous or current <= floor):
            return False

    return gaps[-1] <= max(floor, 0.5 * gaps[0])


def check_sequence(
    F_n: Sequence[UFunctional],
    probes: Sequence[FunctionElement],
    cert: GrowthCertificate,
    config: ToolkitConfig | None = None,
) -> ConvergenceReport:
    """
    Numerical form of the convergence theorem for sequences of U-functionals.

    Pointwise Cauchy behavior: the gap max_probe |F_{k+1} - F_k| must decrease
    strictly beyond the configured settle index (gaps at or below the floor
    count as converged) and end below half of the first considered gap. The
    uniform bound is tested for every member at every probe scaled by
    z in {1, i, -1, -i}. Applies to S- and T-transforms alike.

    Args:
        F_n (Sequence[UFunctional]): At least three members
        probes (Sequence[FunctionElement]): Test functions
        cert (GrowthCertificate): The claimed uniform bound
        config (ToolkitConfig, optional): Gap floor and settle index

    Returns:
        ConvergenceReport: verdict True certifies numerical convergence
    """
    if len(F_n) < 3:
        raise ValueError("check_sequence needs at least 3 members")

    config = config or get_config()
    logger.info("Checking sequence of %s functionals on %s probes", len(F_n), len(probes))

    values = np.array([[F(xi) for xi in probes] for F in F_n], dtype=complex)
    gaps = [float(np.max(np.abs(values[k + 1] - values[k]))) for k in range(len(F_n) - 1)]
    tail = gaps[config.settle_index :]

    violations = 0
    for F in F_n:
        for xi in probes:
            size = norm(xi, cert.norm)
            for z in SEQUENCE_BOUND_SCALES:
                log_value = _log_abs(F(xi.scaled(z)))
                if _exceeds(log_value, cert.log_bound(abs(z), size), config.bound_slack):
                    violations += 1

    settles = _gaps_settle(tail, config.gap_floor)
    logger.debug("Sequence gaps %s, settles=%s, violations=%s", gaps, settles, violations)

    return ConvergenceReport(
        cauchy_max_gap=max(tail) if tail else 0.0,
        bound_violations=violations,
        verdict=violations == 0 and settles,
        trials=len(probes),
        gaps=gaps,
    )


def ray_analyticity_residual(
    F: Callable[[FunctionElement], complex],
    xi: FunctionElement,
    zeta: FunctionElement,
    lam: complex = 0.3 + 0.2j,
    h: float = 1e-3,
) -> float:
    """
    Cauchy-Riemann residual of lambda -> F(lambda xi + zeta) at lam.

    Both partial derivatives are taken with 4th-order central differences;
    for a ray-entire F the residual |f_y - i f_x| vanishes up to O(h^4).
    """

    def restricted(point: complex) -> complex:
        return complex(F(xi.scaled(point) + zeta))

    def derivative(direction: complex) -> complex:
        step = h * direction
        return (
            -restricted(lam + 2 * step)
            + 8 * restricted(lam + step)
            - 8 * restricted(lam - step)
            + restricted(lam - 2 * step)
        ) / (12 * h)

    return abs(derivative(1j) - 1j * derivative(1.0))


def scalar_cauchy_riemann(f: Callable[[complex], complex], point: complex, h: float = 1e-3) -> float:
    """Cauchy-Riemann residual of a scalar function of one complex variable."""

    def derivative(direction: complex) -> complex:
        step = h * direction
        return (
            -f(point + 2 * step) + 8 * f(point + step) - 8 * f(point - step) + f(point - 2 * step)
        ) / (12 * h)

    return abs(derivative(1j) - 1j * derivative(1.0))


# ----------------------- Parameter integrals
class ParameterFamily(BaseModel):
    """
    lambda -> Phi(lambda) through its transform F(lambda, xi), with the declared
    bound functions K1 (integrable) and K2 (bounded).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    evaluator: Callable[[float, FunctionElement], complex]
    k1: Callable[[float], float]
    k2: Callable[[float], float]
    density: Callable[[float], float] | None = None


def integrate_family(
    family: ParameterFamily,
    lower: float,
    upper: float,
    xi: FunctionElement,
    spec: QuadratureSpec | None = None,
    reciprocal_below: float | None = None,
) -> complex:
    """
    Integrate a family of transforms over a parameter: int F(lambda, xi) dm.

    Intertwines transform and integration. Before integrating, the declared
    K1 is integrated (it must be finite) and K2 is sampled (it must stay
    finite). Below `reciprocal_below` the substitution u = 1/lambda is used,
    which turns an exp(-c/lambda) endpoint into a decaying tail.

    Args:
        family (ParameterFamily): Integrand and its bound metadata
        lower (float): Lower end of the parameter interval
        upper (float): Upper end
        xi (FunctionElement): Test function
        spec (QuadratureSpec, optional): Tolerances
        reciprocal_below (float, optional): Substitution cut, lower < cut < upper

    Returns:
        complex: The integral

    Raises:
        QuadratureFailure: If the family integral cannot reach the tolerance
        DomainViolation: If K1 is not integrable or K2 is not bounded on the interval
    """
    spec = spec or get_config().family_quadrature
    density = family.density or (lambda lam: 1.0)

    samples = np.linspace(lower, upper, 65)[1:]
    if not all(math.isfinite(family.k1(float(lam))) for lam in samples):
        logger.error("Declared K1 is not finite on [%s, %s]", lower, upper)
        raise DomainViolation(
            "K1 must be integrable on the parameter domain", {"lower": lower, "upper": upper}
        )

    if not all(math.isfinite(family.k2(float(lam))) for lam in samples):
        logger.error("Declared K2 is unbounded on [%s, %s]", lower, upper)
        raise DomainViolation("K2 must be bounded on the parameter domain")

    def pieces(func: Callable[[float], complex]) -> complex:
        if reciprocal_below is None:
            return integrate_complex(lambda lam: func(lam) * density(lam), lower, upper, spec)

        far = math.inf if lower == 0 else 1.0 / lower
        head = integrate_complex(
            lambda u: func(1.0 / u) * density(1.0 / u) / u**2, 1.0 / reciprocal_below, far, spec
        )
        tail = integrate_complex(
            lambda lam: func(lam) * density(lam), reciprocal_below, upper, spec
        )
        return head + tail

    try:
        k1_mass = pieces(lambda lam: complex(family.k1(lam)))
    except QuadratureFailure as err:
        logger.error("Declared K1 is not integrable on [%s, %s]", lower, upper)
        raise DomainViolation(
            "K1 must be integrable on the parameter domain",
            {"lower": lower, "upper": upper, **err.details},
        ) from err

    if not math.isfinite(k1_mass.real):
        raise DomainViolation(
            "K1 must be integrable on the parameter domain", {"lower": lower, "upper": upper}
        )
    logger.debug("Declared K1 integrates to %.6e", k1_mass.real)

    return complex(pieces(lambda lam: family.evaluator(lam, xi)))
