"""
Donsker's delta function, its complex scaling sigma_z delta and the
regularized approximants phi_{n,z}.
"""

import cmath
import math
import logging
from functools import cached_property
from typing import Sequence

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    NonNegativeFloat,
    PositiveInt,
    field_validator,
    model_validator,
)
from scipy import special

from ..config import ToolkitConfig, get_config
from ..exception import NonpositiveTime, SectorViolation
from ..functions import (
    QUARTER_PI,
    FunctionElement,
    HermiteSpan,
    Sector,
    hermite_projection,
    indicator,
    inner_product,
    norm,
    sector_contains,
)
from ..quadrature import integrate_complex
from ..ufunctional import (
    ConvergenceReport,
    GrowthCertificate,
    UFunctional,
    characteristic_functional,
    check_sequence,
)

logger = logging.getLogger("pydonsker")

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


class DonskerDelta(BaseModel):
    """sigma_z delta(<., eta> - a); z = 1 gives the unscaled delta."""

    model_config = ConfigDict(frozen=True)

    eta: FunctionElement
    a: complex = 0j
    z: complex = 1 + 0j
    sector: Sector = Sector()

    @model_validator(mode="after")
    def _check_invariants(self) -> "DonskerDelta":
        if norm(self.eta) <= 0:
            raise ValueError("pairing direction eta must have |eta|_0 > 0")

        if not sector_contains(self.sector, self.z):
            logger.error("Scaling z=%s outside sector alpha=%s", self.z, self.sector.alpha)
            raise SectorViolation(
                f"z = {self.z} lies outside S_alpha for alpha = {self.sector.alpha}",
                {"z": [self.z.real, self.z.imag], "alpha": self.sector.alpha},
            )
        return self

    @cached_property
    def eta_norm(self) -> float:
        return norm(self.eta)

    def with_scaling(self, z: complex) -> "DonskerDelta":
        return DonskerDelta(eta=self.eta, a=self.a, z=z, sector=self.sector)


def brownian_delta(t: float, a: complex = 0j, z: complex = 1 + 0j, alpha: float = 0.0) -> DonskerDelta:
    """sigma_z delta(B(t) - a) with B(t) = <., 1_[0,t]>."""
    if t <= 0:
        raise NonpositiveTime(f"time must be positive, got {t}")
    return DonskerDelta(eta=indicator(t), a=a, z=z, sector=Sector(alpha=alpha))


# ----------------------- Closed forms
def s_delta(t: float, a: complex, xi: FunctionElement) -> complex:
    """
    S-transform of delta(B(t) - a), a complex.

    (2 pi t)^{-1/2} exp(-(int_0^t xi - a)^2 / 2t)

    Raises:
        NonpositiveTime: If t <= 0
    """
    if t <= 0:
        logger.error("s_delta called with nonpositive time %s", t)
        raise NonpositiveTime(f"time must be positive, got {t}")

    shift = inner_product(xi, indicator(t)) - a
    return cmath.exp(-(shift**2) / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def t_delta(t: float, a: complex, xi: FunctionElement) -> complex:
    """T-transform of delta(B(t) - a): C(xi) (2 pi t)^{-1/2} exp(-(i int_0^t xi - a)^2 / 2t)."""
    if t <= 0:
        raise NonpositiveTime(f"time must be positive, got {t}")

    shift = 1j * inner_product(xi, indicator(t)) - a
    return (
        characteristic_functional(xi)
        * cmath.exp(-(shift**2) / (2.0 * t))
        / math.sqrt(2.0 * math.pi * t)
    )


def s_scaled_delta(d: DonskerDelta, xi: FunctionElement) -> complex:
    """
    S-transform of sigma_z delta(<., eta> - a).

    (sqrt(2 pi) z |eta|_0)^{-1} exp(-(a - z (xi, eta))^2 / (2 z^2 |eta|_0^2))
    """
    z, size = d.z, d.eta_norm
    shift = d.a - z * inner_product(xi, d.eta)
    return cmath.exp(-(shift**2) / (2.0 * z**2 * size**2)) / (SQRT_TWO_PI * z * size)


def t_scaled_delta(d: DonskerDelta, xi: FunctionElement) -> complex:
    """T-transform of sigma_z delta(<., eta> - a)."""
    z, size = d.z, d.eta_norm
    shift = d.a - 1j * z * inner_product(xi, d.eta)
    return (
        characteristic_functional(xi)
        * cmath.exp(-(shift**2) / (2.0 * z**2 * size**2))
        / (SQRT_TWO_PI * z * size)
    )


def homogeneous_partner(d: DonskerDelta) -> DonskerDelta:
    """delta(<., eta> - a/z), so that sigma_z delta = (1/z) * partner."""
    return DonskerDelta(eta=d.eta, a=d.a / d.z, z=1.0, sector=Sector())


def delta_certificate(d: DonskerDelta, s: float = 0.5) -> GrowthCertificate:
    """
    Growth constants of S sigma_z delta, valid for every s > 0.

    K1 = (sqrt(2 pi) |z| |eta|_0)^{-1} exp((1 + 1/s^2) |a|^2 / (2 |eta|_0^2 |z|^2)),
    K2 = (1 + s^2) / 2, in the |.|_0 norm.
    """
    if s <= 0:
        raise ValueError("s must be positive")

    z_abs, size = abs(d.z), d.eta_norm
    K1 = math.exp(
        (1.0 + 1.0 / s**2) * abs(d.a) ** 2 / (2.0 * size**2 * z_abs**2)
    ) / (SQRT_TWO_PI * z_abs * size)
    return GrowthCertificate(K1=K1, K2=0.5 * (1.0 + s**2))


def scaled_delta_ufunctional(d: DonskerDelta, s: float = 0.5) -> UFunctional:
    return UFunctional(
        evaluator=lambda xi: s_scaled_delta(d, xi),
        certificate=delta_certificate(d, s),
        name=f"S sigma_{d.z} delta",
    )


def t_scaled_delta_ufunctional(d: DonskerDelta, s: float = 0.5) -> UFunctional:
    cert = delta_certificate(d, s)
    return UFunctional(
        evaluator=lambda xi: t_scaled_delta(d, xi),
        certificate=GrowthCertificate(K1=cert.K1, K2=cert.K2 + 0.5),
        kind="T",
        name=f"T sigma_{d.z} delta",
    )


def singularity_order(K2: float, p: int) -> float:
    """
    Threshold q* with Phi in (S)_{-q} for every q > q*, given a bound
    K1 exp(K2 |z|^2 |xi|_p^2).

    Returns:
        float: ln(K2) / (2 ln 2) + p + 1
    """
    if K2 <= 0:
        raise ValueError("K2 must be positive")
    return math.log(K2) / (2.0 * math.log(2.0)) + p + 1


def scaling_continuity_check(
    d: DonskerDelta,
    z_sequence: Sequence[complex],
    probes: Sequence[FunctionElement],
    s: float = 0.5,
    config: ToolkitConfig | None = None,
) -> ConvergenceReport:
    """
    Continuity of z -> sigma_z delta along a sequence z_n inside the sector.

    The uniform bound uses K1 = max_n K_{1,n} and K2 = (1 + s^2)/2.

    Raises:
        SectorViolation: If some z_n leaves the sector
    """
    members = [d.with_scaling(z) for z in z_sequence]
    K1 = max(delta_certificate(member, s).K1 for member in members)
    cert = GrowthCertificate(K1=K1, K2=0.5 * (1.0 + s**2))

    logger.info("Checking continuity in z along %s points", len(members))
    return check_sequence(
        [scaled_delta_ufunctional(member, s) for member in members], probes, cert, config
    )


# ----------------------- Approximants phi_{n,z}
class ApproximantSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: PositiveInt
    alpha: float = 0.0
    eta_n: HermiteSpan
    # |eta - eta_n|_0 for the eta the sequence was packaged from
    projection_error: NonNegativeFloat = 0.0

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, alpha: float) -> float:
        if not abs(alpha) < QUARTER_PI:
            raise ValueError(f"contour angle must satisfy |alpha| < pi/4, got {alpha}")
        return alpha

    @cached_property
    def eta_norm(self) -> float:
        return norm(self.eta_n)

    @property
    def sector(self) -> Sector:
        return Sector(alpha=self.alpha)


def packaged_approximants(
    eta: FunctionElement, ns: Sequence[int], alpha: float = 0.0
) -> list[ApproximantSpec]:
    """
    The packaged sequence eta_n: Hermite projection of eta onto n^2 coefficients.

    A Hermite span no longer than n^2 is its own projection. Otherwise the
    projection error |eta - eta_n|_0^2 = |eta|_0^2 - |eta_n|_0^2 is recorded
    on the spec, since the e_k are real and orthonormal.
    """
    specs = []
    size = norm(eta)
    for n in ns:
        if isinstance(eta, HermiteSpan) and len(eta.coeffs) <= n * n:
            eta_n, error = eta, 0.0
        else:
            eta_n = hermite_projection(eta, n * n)
            error = math.sqrt(max(size**2 - norm(eta_n) ** 2, 0.0))
        logger.debug("eta_%s: %s coefficients, projection error %.3e", n, n * n, error)
        specs.append(
            ApproximantSpec(n=n, alpha=alpha, eta_n=eta_n, projection_error=error)
        )
    return specs


def s_approximant(
    spec: ApproximantSpec,
    z: complex,
    a: complex,
    xi: FunctionElement,
    config: ToolkitConfig | None = None,
) -> complex:
    """
    S-transform of phi_{n,z} on the rotated contour nu = e^{i alpha} lambda:

    (2 pi)^{-1} e^{-i alpha} int_{-n}^{n}
        exp(-z^2 e^{-2i alpha} nu^2 |eta_n|^2 / 2 + i e^{-i alpha} nu (z (xi, eta_n) - a)) dnu

    Raises:
        SectorViolation: If z is not in S_alpha
        QuadratureFailure: If the tolerance cannot be reached
    """
    config = config or get_config()
    if not sector_contains(spec.sector, z):
        raise SectorViolation(f"z = {z} lies outside S_alpha for alpha = {spec.alpha}")

    rotation = cmath.exp(-1j * spec.alpha)
    quadratic = 0.5 * z * z * rotation**2 * spec.eta_norm**2
    linear = 1j * rotation * (z * inner_product(xi, spec.eta_n) - a)

    def integrand(nu: float) -> complex:
        return cmath.exp(-quadratic * nu * nu + linear * nu)

    integral = integrate_complex(integrand, -spec.n, spec.n, config.approximant_quadrature)
    return rotation * integral / (2.0 * math.pi)


def approximant_certificate(spec: ApproximantSpec, z: complex, a: complex) -> GrowthCertificate:
    """
    Uniform bound of S phi_{n,z}, from the full-line Gaussian integral of the
    integrand's modulus: K1 = (2 pi R |eta_n|^2)^{-1/2} exp(|a|^2 / (R |eta_n|^2)),
    K2 = |z|^2 / R, R = Re(z^2 e^{-2 i alpha}).
    """
    R = spec.sector.rotated_square(z).real
    weight = R * spec.eta_norm**2
    K1 = math.exp(abs(a) ** 2 / weight) / math.sqrt(2.0 * math.pi * weight)
    return GrowthCertificate(K1=K1, K2=abs(z) ** 2 / R)


def approximant_ufunctional(
    spec: ApproximantSpec, z: complex, a: complex, config: ToolkitConfig | None = None
) -> UFunctional:
    return UFunctional(
        evaluator=lambda xi: s_approximant(spec, z, a, xi, config),
        certificate=approximant_certificate(spec, z, a),
        name=f"S phi_{spec.n},{z}",
    )


def approximant_tail_bound(
    spec: ApproximantSpec, z: complex, a: complex, xi: FunctionElement
) -> float:
    """
    Bound on |S phi_{n,z}(xi) - S sigma_z delta(<., eta> - a)(xi)|, eta being
    the element the spec was packaged from.

    The truncated part of the full-line integral, |nu| > n, is bounded first.
    When eta_n differs from eta (delta = |eta - eta_n|_0 > 0) the full-line
    integrands differ by at most
    (|z|^2 delta^2 nu^2 / 2 + |z| |xi|_0 delta |nu|) exp(-Q nu^2 / 2 + C |nu|),
    Q = Re(z^2 e^{-2i alpha}) |eta_n|_0^2, C = |z (xi, eta_n) - a| + |z| |xi|_0 delta,
    whose integral is added.
    """
    Q = spec.sector.rotated_square(z).real * spec.eta_norm**2
    B = abs(z * inner_product(xi, spec.eta_n) - a)
    scale = math.sqrt(2.0 * Q)
    tail = (
        math.sqrt(math.pi / (2.0 * Q))
        * math.exp(min(B * B / (2.0 * Q), 700.0))
        * special.erfc((Q * spec.n - B) / scale)
    ) / math.pi

    delta = spec.projection_error
    if delta == 0:
        return float(tail)

    shift = abs(z) * norm(xi) * delta
    C = B + shift
    # int_R |nu|^k exp(-Q nu^2 / 2 + C |nu|) dnu for k = 1, 2
    mean = C / Q
    gauss = math.sqrt(math.pi / (2.0 * Q)) * float(special.erfcx(-C / scale))
    first = 2.0 * (1.0 / Q + mean * gauss)
    second = 2.0 * (mean / Q + (1.0 / Q + mean**2) * gauss)

    projection = (0.5 * abs(z) ** 2 * delta**2 * second + shift * first) / (2.0 * math.pi)
    return float(tail + projection)


def approximant_pointwise(
    spec: ApproximantSpec, z: complex, a: complex, pairing: np.ndarray
) -> np.ndarray:
    """
    phi_{n,z}(omega) = sin(n e^{-i alpha} (z <omega, eta_n> - a)) / (pi (z <omega, eta_n> - a))
    evaluated on samples of the pairing <omega, eta_n>.
    """
    rotation = np.exp(-1j * spec.alpha)
    shift = z * np.asarray(pairing) - a
    # np.sinc(x) = sin(pi x) / (pi x), finite at 0
    return spec.n * rotation / np.pi * np.sinc(spec.n * rotation * shift / np.pi)
