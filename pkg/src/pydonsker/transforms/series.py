"""
Infinite sums of shifted scaled deltas sum_n sigma_z delta(B(t) - a + n),
packaged by the Jacobi theta function, and their partial sums.
"""

import math
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, model_validator

from ..exception import DivergentTheta, NonpositiveTime
from ..functions import FunctionElement, Sector, indicator, inner_product, sector_contains
from .donsker import DonskerDelta, s_scaled_delta

logger = logging.getLogger("pydonsker")

DEFAULT_THETA_TOL = 1e-16
# log|term_n| must fall at least this fast in n^2 for the series to converge
GROWTH_TOLERANCE = 1e-9
# summation half-widths beyond this are refused
MAX_THETA_HALF_WIDTH = 1_000_000


class ThetaArgs(BaseModel):
    """Arguments of theta(rho, tau) = sum_n exp(pi i n^2 tau + 2 pi i n rho)."""

    model_config = ConfigDict(frozen=True)

    rho: complex
    tau: complex

    @model_validator(mode="after")
    def _check_tau(self) -> "ThetaArgs":
        if not self.tau.imag > 0:
            logger.error("Theta series requested with Im(tau) = %s", self.tau.imag)
            raise DivergentTheta(
                "the theta function does not converge for these arguments: Im(tau) <= 0",
                {"rho": [self.rho.real, self.rho.imag], "tau": [self.tau.real, self.tau.imag]},
            )
        return self


class ThetaResult(BaseModel):
    value: complex
    truncation: int
    center: int


def theta(args: ThetaArgs, tol: float = DEFAULT_THETA_TOL) -> ThetaResult:
    """
    Evaluate the Jacobi theta function by a truncated sum.

    Term moduli are Gaussian in n around n* = -Im(rho) / Im(tau); the sum runs
    over |n - round(n*)| <= K with K = ceil(sqrt(2 ln(1/tol) / (pi Im tau))) + 2,
    which leaves every dropped term below tol^2 times the largest one.

    Args:
        args (ThetaArgs): rho and tau, Im(tau) > 0
        tol (float): Relative truncation tolerance

    Returns:
        ThetaResult: value, half-width K and center of the summation window

    Raises:
        DivergentTheta: If K exceeds MAX_THETA_HALF_WIDTH
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")

    width = args.tau.imag
    center = round(-args.rho.imag / width)
    K = math.ceil(math.sqrt(2.0 * math.log(1.0 / tol) / (math.pi * width))) + 2
    if K > MAX_THETA_HALF_WIDTH:
        logger.error("Theta series at Im(tau) = %s needs %s terms", width, 2 * K + 1)
        raise DivergentTheta(
            "the theta series converges too slowly for these arguments: Im(tau) is too small",
            {"tau": [args.tau.real, args.tau.imag], "truncation": K},
        )

    n = np.arange(center - K, center + K + 1)
    terms = np.exp(1j * np.pi * n**2 * args.tau + 2j * np.pi * n * args.rho)
    value = complex(
        math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist())
    )

    logger.debug("theta(%s, %s): %s terms around n=%s", args.rho, args.tau, 2 * K + 1, center)
    return ThetaResult(value=value, truncation=K, center=center)


class DeltaSeries(BaseModel):
    """sum_n sigma_z delta(B(t) - a + n)."""

    model_config = ConfigDict(frozen=True)

    z: complex = 1 + 0j
    t: PositiveFloat
    a: complex = 0j

    @model_validator(mode="before")
    @classmethod
    def _check_time(cls, data: dict) -> dict:
        t = data.get("t") if isinstance(data, dict) else None
        if isinstance(t, (int, float)) and t <= 0:
            raise NonpositiveTime(f"time must be positive, got {t}")
        return data

    @model_validator(mode="after")
    def _check_sector(self) -> "DeltaSeries":
        if self.z == 0 or not (
            (1.0 / self.z**2).real > 0 and sector_contains(Sector(), self.z)
        ):
            logger.error("Delta series requested for z=%s outside S_0", self.z)
            raise DivergentTheta(
                "z outside S_0: the series does not converge for this value of z",
                {"z": [self.z.real, self.z.imag]},
            )
        return self

    @property
    def base(self) -> DonskerDelta:
        return DonskerDelta(eta=indicator(self.t), a=self.a, z=self.z)

    @property
    def decay(self) -> float:
        """Re(1/z^2)."""
        return (1.0 / self.z**2).real


def theta_args(d: DeltaSeries, xi: FunctionElement) -> ThetaArgs:
    """
    rho = (i / (2 pi t z)) (int_0^t xi - a/z), tau = i / (2 pi t z^2).

    Expanding (a - n - z c)^2 / z^2 in n gives these arguments; at z = 1 the
    extra 1/z in rho disappears.
    """
    c = inner_product(xi, indicator(d.t))
    rho = 1j / (2.0 * math.pi * d.t * d.z) * (c - d.a / d.z)
    tau = 1j / (2.0 * math.pi * d.t * d.z**2)
    return ThetaArgs(rho=rho, tau=tau)


def s_series(d: DeltaSeries, xi: FunctionElement, tol: float = DEFAULT_THETA_TOL) -> complex:
    """
    S-transform of the delta series: S sigma_z delta(xi) * theta(rho, tau).

    Equal to the directly summed s_scaled_delta with a replaced by a - n.
    """
    return s_scaled_delta(d.base, xi) * theta(theta_args(d, xi), tol).value


class PartialSum(BaseModel):
    value: complex
    N: int
    diverges: bool
    growth_exponent: float


def _log_term_moduli(base: DonskerDelta, n: np.ndarray, pairing: complex) -> np.ndarray:
    z, size = base.z, base.eta_norm
    shift = base.a - n - z * pairing
    return np.real(-(shift**2) / (2.0 * z**2 * size**2)) - math.log(
        math.sqrt(2.0 * math.pi) * abs(z) * size
    )


def partial_sum(base: DonskerDelta, N: int, xi: FunctionElement) -> PartialSum:
    """
    Phi_N = sum_{n=-N}^{N} sigma_z delta(<., eta> - a + n), for any sector z.

    The growth exponent is the n^2 coefficient of log|term_n|, fitted by
    least squares (exactly -Re(1/z^2) / (2 |eta|^2)); the series is flagged
    divergent when it is not negative.

    Args:
        base (DonskerDelta): The n = 0 term
        N (int): Truncation, N >= 0
        xi (FunctionElement): Test function

    Returns:
        PartialSum: value, N, divergence flag and growth exponent
    """
    if N < 0:
        raise ValueError("N must be non-negative")

    n = np.arange(-N, N + 1)
    terms = [
        s_scaled_delta(DonskerDelta(eta=base.eta, a=base.a - k, z=base.z, sector=base.sector), xi)
        for k in n.tolist()
    ]
    value = complex(
        math.fsum(term.real for term in terms), math.fsum(term.imag for term in terms)
    )

    if len(n) >= 3:
        log_moduli = _log_term_moduli(base, n, inner_product(xi, base.eta))
        growth = float(np.polynomial.polynomial.polyfit(n, log_moduli, 2)[2])
    else:
        growth = -(1.0 / base.z**2).real / (2.0 * base.eta_norm**2)

    diverges = growth > -GROWTH_TOLERANCE
    if diverges:
        logger.warning("Partial sums at z=%s do not decay (growth exponent %.3e)", base.z, growth)

    return PartialSum(value=value, N=N, diverges=diverges, growth_exponent=growth)


def tail_bound(d: DeltaSeries, xi: FunctionElement, N: int) -> float:
    """
    Bound on |s_series - partial_sum(N)|.

    With R = Re(1/z^2) and w = a/z - int_0^t xi, every term obeys
    |term_n| <= (|z| sqrt(2 pi t))^{-1} exp((|w|^2 (1 + 2/(|z|^2 R)) - n^2 R/2) / 2t),
    so the dropped terms sum to at most twice that prefactor times
    sum_{n > N} exp(-R n^2 / 4t).
    """
    R, z = d.decay, d.z
    w = d.a / z - inner_product(xi, indicator(d.t))

    log_prefactor = abs(w) ** 2 * (1.0 + 2.0 / (abs(z) ** 2 * R)) / (2.0 * d.t) - math.log(
        abs(z) * math.sqrt(2.0 * math.pi * d.t)
    )

    rate = R / (4.0 * d.t)
    stop = N + 2 + math.ceil(math.sqrt(800.0 / rate))
    n = np.arange(N + 1, stop, dtype=float)
    tail = float(np.sum(np.exp(log_prefactor - rate * n**2)))
    return 2.0 * tail
