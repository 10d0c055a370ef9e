"""
Products of scaled Donsker deltas prod_j sigma_z delta(<., f_j> - a_j) through
the Gram-matrix Gaussian formula, with a quadrature oracle over the rotated
lambda contour.
"""

import cmath
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from functools import cached_property
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg

from ..config import QuadratureSpec, ToolkitConfig, get_config
from ..exception import DomainViolation, QuadratureFailure, SectorViolation, SingularGram
from ..functions import FunctionElement, Sector, inner_product, sector_contains
from ..quadrature import integrate_complex
from ..ufunctional import characteristic_functional, s_from_t

logger = logging.getLogger("pydonsker")

MAX_CONDITION = 1e12
ORACLE_CELLS = 8
# |lambda| cut where the oracle integrand has dropped below e^{-50}
ORACLE_DECAY = 50.0


class GramMatrix(BaseModel):
    """M_kl = (f_k, f_l), symmetric positive definite."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def factor(self) -> tuple[np.ndarray, bool]:
        return linalg.cho_factor(self.entries, lower=True)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """M^{-1} rhs through the Cholesky factor."""
        return linalg.cho_solve(self.factor, rhs)

    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.factor[0]))))


def gram(f: Sequence[FunctionElement]) -> GramMatrix:
    """
    Gram matrix of a family of real elements.

    Args:
        f (Sequence[FunctionElement]): Non-empty family

    Returns:
        GramMatrix: The pairwise inner products

    Raises:
        SingularGram: If the diagonal-scaled condition number exceeds 1e12
        DomainViolation: If the family is not real
    """
    if not f:
        raise ValueError("gram needs a non-empty family")

    n = len(f)
    entries = np.empty((n, n), dtype=complex)
    for k in range(n):
        for l in range(k, n):
            entries[k, l] = entries[l, k] = inner_product(f[k], f[l])

    scale = float(np.max(np.abs(entries)))
    if np.max(np.abs(entries.imag)) > 1e-12 * max(scale, 1.0):
        raise DomainViolation("Gram matrices are formed from real elements only")
    entries = entries.real

    diagonal = np.diag(entries)
    if np.any(diagonal <= 0):
        logger.error("Gram matrix has a vanishing diagonal entry")
        raise SingularGram("family contains a zero element", {"diagonal": diagonal.tolist()})

    scaled = entries / np.sqrt(np.outer(diagonal, diagonal))
    condition = float(np.linalg.cond(scaled))
    if not math.isfinite(condition) or condition > MAX_CONDITION:
        logger.error("Gram matrix condition number %.3e exceeds %.0e", condition, MAX_CONDITION)
        raise SingularGram(
            "family is numerically linearly dependent", {"condition": condition}
        )

    logger.debug("Gram matrix of %s elements, relative condition %.3e", n, condition)
    return GramMatrix(entries=entries)


class ProductFactor(BaseModel):
    model_config = ConfigDict(frozen=True)

    f: FunctionElement
    a: complex = 0j


class DeltaProduct(BaseModel):
    model_config = ConfigDict(frozen=True)

    z: complex = 1 + 0j
    factors: tuple[ProductFactor, ...] = Field(min_length=1)
    sector: Sector = Sector()

    @model_validator(mode="after")
    def _check_invariants(self) -> "DeltaProduct":
        if not sector_contains(self.sector, self.z):
            raise SectorViolation(
                f"z = {self.z} lies outside S_alpha for alpha = {self.sector.alpha}"
            )
        # raises SingularGram for dependent families
        _ = self.gram_matrix
        return self

    @cached_property
    def gram_matrix(self) -> GramMatrix:
        return gram([factor.f for factor in self.factors])

    @property
    def shifts(self) -> np.ndarray:
        return np.array([factor.a for factor in self.factors], dtype=complex)


def s_product(p: DeltaProduct, xi: FunctionElement) -> complex:
    """
    S-transform of prod_j sigma_z delta(<., f_j> - a_j).

    ((2 pi z^2)^n det M)^{-1/2} exp(-v M^{-1} v / 2), v = (f, xi) - a/z,
    with (z^2)^{-n/2} taken as z^{-n}.
    """
    M = p.gram_matrix
    n = M.size
    v = np.array([inner_product(factor.f, xi) for factor in p.factors]) - p.shifts / p.z
    quadratic = complex(v @ M.solve(v))

    log_prefactor = -0.5 * n * math.log(2.0 * math.pi) - 0.5 * M.log_det()
    return p.z ** (-n) * cmath.exp(log_prefactor - 0.5 * quadratic)


# ----------------------- Quadrature oracle
def _oracle_radius(quadratic: complex, M: GramMatrix, linear: np.ndarray) -> float:
    smallest = float(np.linalg.eigvalsh(M.entries)[0])
    curvature = quadratic.real * smallest
    drift = float(np.linalg.norm(linear))
    return (drift + math.sqrt(drift**2 + 2.0 * curvature * ORACLE_DECAY)) / curvature


def t_product_oracle(
    p: DeltaProduct,
    xi: FunctionElement,
    spec: QuadratureSpec | None = None,
    alpha: float | None = None,
    config: ToolkitConfig | None = None,
) -> complex:
    """
    T-transform of the product from the n-dimensional lambda integral

    e^{-i alpha n} (2 pi)^{-n} C(xi) int exp(-z^2 e^{-2i alpha} lam M lam / 2
        - z e^{-i alpha} lam (f, xi) - i e^{-i alpha} lam a) d^n lam,

    computed by iterated adaptive quadrature. The outermost dimension is split
    into fixed cells integrated in parallel and summed exactly.

    Args:
        p (DeltaProduct): The product, n <= 3
        xi (FunctionElement): Test function (complex scalings allowed)
        spec (QuadratureSpec, optional): Tolerances for every level
        alpha (float, optional): Contour angle, defaults to the product's sector
        config (ToolkitConfig, optional): Worker count

    Raises:
        QuadratureFailure: If Re(z^2 e^{-2i alpha}) <= 0 or a level fails
    """
    config = config or get_config()
    spec = spec or QuadratureSpec(epsabs=1e-11, epsrel=1e-10)
    alpha = p.sector.alpha if alpha is None else alpha

    M = p.gram_matrix
    n = M.size
    if n > 3:
        raise ValueError("the quadrature oracle handles at most 3 factors")

    rotation = cmath.exp(-1j * alpha)
    quadratic = 0.5 * p.z**2 * rotation**2
    if quadratic.real <= 1e-12:
        logger.error("Gaussian lambda integral diverges for z=%s, alpha=%s", p.z, alpha)
        raise QuadratureFailure(
            "Gaussian integral ceases to converge: Re(z^2 e^{-2i alpha}) <= 0",
            {"z": [p.z.real, p.z.imag], "alpha": alpha},
        )

    pairing = np.array([inner_product(factor.f, xi) for factor in p.factors])
    linear = -p.z * rotation * pairing - 1j * rotation * p.shifts
    entries = M.entries
    radius = _oracle_radius(quadratic, M, np.abs(linear))

    def exponent(lam: np.ndarray) -> complex:
        return -quadratic * (lam @ entries @ lam) + linear @ lam

    def nested(prefix: tuple[float, ...]) -> complex:
        def integrand(value: float) -> complex:
            point = prefix + (value,)
            if len(point) == n:
                return cmath.exp(exponent(np.array(point)))
            return nested(point)

        return integrate_complex(integrand, -radius, radius, spec)

    def cell(bounds: tuple[float, float]) -> complex:
        def integrand(value: float) -> complex:
            if n == 1:
                return cmath.exp(exponent(np.array([value])))
            return nested((value,))

        return integrate_complex(integrand, bounds[0], bounds[1], spec)

    edges = np.linspace(-radius, radius, ORACLE_CELLS + 1)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        pieces = list(pool.map(cell, zip(edges[:-1], edges[1:])))

    integral = complex(
        math.fsum(piece.real for piece in pieces), math.fsum(piece.imag for piece in pieces)
    )
    logger.debug("Product oracle: n=%s, radius %.3f, integral %s", n, radius, integral)

    return rotation**n / (2.0 * math.pi) ** n * characteristic_functional(xi) * integral


def s_product_oracle(
    p: DeltaProduct,
    xi: FunctionElement,
    spec: QuadratureSpec | None = None,
    alpha: float | None = None,
    config: ToolkitConfig | None = None,
) -> complex:
    """S-transform of the product obtained from the oracle's T-transform via S = C(xi) T(-i xi)."""
    return s_from_t(lambda x: t_product_oracle(p, x, spec, alpha, config), xi)
