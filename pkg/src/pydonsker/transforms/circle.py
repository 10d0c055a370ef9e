"""
Free quantum particle on a circle: the free Feynman integrand I_0, smeared
final wave packets, the T-transform of the propagator I and the Feynman
integral TI(0), with a Schroedinger residual check.

The angle is phi(t) = phi0 + B(t) modulo 2 pi; a packet F(phi) =
sum_l a_l e^{i l phi} on the final angle gives

TI(xi) = e^{-(i/2)(xi, xi)} sum_l a_l exp(-(i/2) l^2 t + i l (phi0 - int_0^t xi)).
"""

import cmath
import math
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, field_validator, model_validator

from ..config import ToolkitConfig, get_config
from ..exception import DivergentTheta, NonpositiveTime
from ..functions import FunctionElement, Sector, indicator, inner_product, zero
from ..schema import DivergenceReport
from .donsker import DonskerDelta
from .series import DeltaSeries, ThetaArgs, partial_sum, s_series

logger = logging.getLogger("pydonsker")

MAX_MODE = 512
SQRT_I = cmath.exp(1j * math.pi / 4)
RESIDUAL_COLUMNS = ("phi0", "t", "psi_re", "psi_im", "residual")


class WavePacket(BaseModel):
    """
    Finite Fourier series sum_l a_l e^{i l phi}, |l| <= 512.

    s is the summability witness entering the bound
    sum_l |a_l| e^{s^2 l^2 / 2}.
    """

    model_config = ConfigDict(frozen=True)

    coeffs: dict[int, complex]
    s: PositiveFloat = 1.0

    @field_validator("coeffs")
    @classmethod
    def _check_modes(cls, coeffs: dict[int, complex]) -> dict[int, complex]:
        if any(abs(l) > MAX_MODE for l in coeffs):
            raise ValueError(f"wave packet modes must satisfy |l| <= {MAX_MODE}")
        return coeffs

    @property
    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        ls = np.array(sorted(self.coeffs), dtype=float)
        amps = np.array([self.coeffs[l] for l in sorted(self.coeffs)], dtype=complex)
        return ls, amps

    def log_summability(self) -> float:
        """log sum_l |a_l| e^{s^2 l^2 / 2}."""
        ls, amps = self.modes
        sizes = np.abs(amps)
        keep = sizes > 0
        if not np.any(keep):
            return -math.inf
        return float(np.logaddexp.reduce(np.log(sizes[keep]) + 0.5 * self.s**2 * ls[keep] ** 2))


class CircleState(BaseModel):
    """Initial angle, time and final packet; t = 0 is admitted as the limiting case."""

    model_config = ConfigDict(frozen=True)

    phi0: float = 0.0
    t: float
    packet: WavePacket

    @model_validator(mode="after")
    def _check_time(self) -> "CircleState":
        if self.t < 0:
            raise NonpositiveTime(f"time must be non-negative, got {self.t}")
        return self


def _mode_sum(packet: WavePacket, phi0: np.ndarray | float, t: np.ndarray | float) -> np.ndarray:
    ls, amps = packet.modes
    phi0 = np.asarray(phi0, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    return np.sum(amps * np.exp(-0.5j * ls**2 * t + 1j * ls * phi0), axis=-1)


def t_free_integrand(xi: FunctionElement) -> complex:
    """TI_0(xi) = exp(-(i/2) (xi, xi))."""
    return cmath.exp(-0.5j * inner_product(xi, xi))


def t_circle(state: CircleState, xi: FunctionElement) -> complex:
    """
    T-transform of the circle propagator with final packet.

    Raises:
        NonpositiveTime: If state.t == 0
    """
    if state.t <= 0:
        raise NonpositiveTime("the T-transform needs t > 0")

    ls, amps = state.packet.modes
    angle = state.phi0 - inner_product(xi, indicator(state.t))
    terms = amps * np.exp(-0.5j * ls**2 * state.t + 1j * ls * angle)
    return t_free_integrand(xi) * complex(np.sum(terms))


def circle_bound(state: CircleState, xi: FunctionElement) -> float:
    """
    Uniform bound |TI(xi)| <= (sum_l |a_l| e^{s^2 l^2/2}) e^{(1 + T/s^2) |xi|_0^2 / 2}
    with T = max(t, 1) and |xi|_0^2 the hermitian norm (xi, conj xi).
    """
    packet = state.packet
    size = float(inner_product(xi, xi.conjugate()).real)
    log_bound = packet.log_summability() + 0.5 * (1.0 + max(state.t, 1.0) / packet.s**2) * size
    with np.errstate(over="ignore"):
        return float(np.exp(log_bound))


def feynman_integral(state: CircleState) -> complex:
    """TI(0) = sum_l a_l exp(-(i/2) l^2 t + i l phi0); also defined at t = 0."""
    return complex(_mode_sum(state.packet, state.phi0, state.t))


def evolve(packet: WavePacket, t: float) -> WavePacket:
    """Free evolution a_l -> a_l e^{-(i/2) l^2 t}."""
    return WavePacket(
        coeffs={l: a * cmath.exp(-0.5j * l * l * t) for l, a in packet.coeffs.items()},
        s=packet.s,
    )


# ----------------------- Schroedinger residual
def _residual_row(packet: WavePacket, phi: np.ndarray, t: float, h: float) -> np.ndarray:
    psi = _mode_sum(packet, phi, t)
    d_t = (_mode_sum(packet, phi, t + h) - _mode_sum(packet, phi, t - h)) / (2.0 * h)
    d_phi2 = (_mode_sum(packet, phi + h, t) - 2.0 * psi + _mode_sum(packet, phi - h, t)) / h**2
    residual = np.abs(1j * d_t + 0.5 * d_phi2)
    return np.column_stack([phi, np.full_like(phi, t), psi.real, psi.imag, residual])


def residual_grid(
    packet: WavePacket,
    phi_grid: np.ndarray,
    t_grid: np.ndarray,
    h: float = 1e-3,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> np.ndarray:
    """
    psi(phi0, t) = TI(0) on the grid with the centered-difference residual
    |i d_t psi + (1/2) d_phi0^2 psi|.

    Returns:
        np.ndarray: rows (phi0, t, psi_re, psi_im, residual), t-major
    """
    config = config or get_config()
    phi = np.asarray(phi_grid, dtype=float)

    with ThreadPoolExecutor(max_workers=workers or config.workers) as pool:
        rows = list(pool.map(lambda t: _residual_row(packet, phi, float(t), h), t_grid))

    return np.vstack(rows)


def schroedinger_residual(
    packet: WavePacket,
    phi_grid: np.ndarray,
    t_grid: np.ndarray,
    h: float = 1e-3,
    workers: int | None = None,
) -> float:
    """Largest finite-difference residual of the free Schroedinger equation on the grid."""
    table = residual_grid(packet, phi_grid, t_grid, h, workers)
    worst = float(np.max(table[:, 4]))
    logger.debug("Schroedinger residual %.3e at h=%s on %s points", worst, h, len(table))
    return worst


# ----------------------- Localized endpoints
def circle_heat_kernel(t: float, phi1: float, phi0: float) -> complex:
    """
    sum_n (2 pi t)^{-1/2} exp(-(phi1 - phi0 - 2 pi n)^2 / 2t), the z = 1 series
    for delta(phi(t) - phi1), evaluated through the theta representation.
    """
    series = DeltaSeries(z=1.0, t=t / (4.0 * math.pi**2), a=(phi1 - phi0) / (2.0 * math.pi))
    return s_series(series, zero()) / (2.0 * math.pi)


def localized_divergence_check(
    t: float, phi1: float, phi0: float, terms: int = 20
) -> DivergenceReport:
    """
    Diagnose the strictly localized propagator.

    The formal theta arguments rho = -(phi1 - phi0)/t, tau = 2 pi / t have a
    real tau, which the theta evaluator rejects. The same endpoints without
    the I_0 factor (z = 1) give the convergent heat kernel, and partial sums
    at z = sqrt(i) have terms of constant modulus.
    """
    if t <= 0:
        raise NonpositiveTime(f"time must be positive, got {t}")

    shift = phi1 - phi0
    rho, tau = complex(-shift / t), complex(2.0 * math.pi / t)

    try:
        ThetaArgs(rho=rho, tau=tau)
        diverges, message = False, "theta arguments accepted"
    except DivergentTheta as exc:
        diverges, message = True, str(exc)

    base = DonskerDelta(
        eta=indicator(t / (4.0 * math.pi**2)),
        a=shift / (2.0 * math.pi),
        z=SQRT_I,
        sector=Sector(alpha=math.pi / 8),
    )
    partial = partial_sum(base, terms, zero())
    moduli = [
        abs(partial_sum(
            DonskerDelta(eta=base.eta, a=base.a - n, z=base.z, sector=base.sector), 0, zero()
        ).value)
        for n in range(terms + 1)
    ]

    logger.info("Localized endpoints at t=%s: theta diverges=%s", t, diverges)
    return DivergenceReport(
        diverges=diverges,
        message=message,
        rho=rho,
        tau=tau,
        heat_kernel=circle_heat_kernel(t, phi1, phi0),
        partial_sum_diverges=partial.diverges,
        growth_exponent=partial.growth_exponent,
        term_moduli=moduli,
    )
