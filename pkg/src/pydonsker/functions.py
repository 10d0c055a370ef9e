"""
Test functions, L^2 elements and the Gel'fand triple norms.

Elements are immutable pydantic models. The pairing (f, g) is the real
bilinear form extended bilinearly to complex coefficients, so (f, g) == (g, f)
and no conjugation is ever applied implicitly; the |.|_0 norm of a complex
element is therefore computed as sqrt((f, conj f)).
"""

import cmath
import math
import logging
from functools import lru_cache
from typing import Annotated

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import get_config
from .enums import NormSign
from .exception import RaisedNormOfNonSchwartz, ZeroScaling
from .quadrature import integrate_complex
from .types import NormSignLiteral

logger = logging.getLogger("pydonsker")

MAX_HERMITE_LENGTH = 4096
QUARTER_PI = math.pi / 4


# ----------------------- Hermite functions
def hermite_functions(x: float | np.ndarray, n: int) -> np.ndarray:
    """
    Evaluate the orthonormal Hermite functions e_0 ... e_{n-1}.

    Uses the normalized three-term recurrence
    e_{k+1} = sqrt(2/(k+1)) x e_k - sqrt(k/(k+1)) e_{k-1}, which stays
    stable for large k.

    Args:
        x (float | np.ndarray): Evaluation point(s)
        n (int): Number of functions

    Returns:
        np.ndarray: Shape x.shape + (n,)
    """
    x = np.asarray(x, dtype=float)
    values = np.zeros(x.shape + (n,))
    if n == 0:
        return values

    values[..., 0] = np.pi ** (-0.25) * np.exp(-(x**2) / 2.0)
    if n > 1:
        values[..., 1] = np.sqrt(2.0) * x * values[..., 0]

    for k in range(1, n - 1):
        values[..., k + 1] = (
            np.sqrt(2.0 / (k + 1)) * x * values[..., k]
            - np.sqrt(k / (k + 1)) * values[..., k - 1]
        )

    return values


def _hermite_support(n: int) -> float:
    # beyond the last turning point e_k(x) < 1e-30 for every k < n
    return math.sqrt(2.0 * n + 1.0) + 12.0


@lru_cache(maxsize=512)
def _indicator_moments(start: float, end: float, length: int) -> np.ndarray:
    """Integrals of e_0 ... e_{length-1} over [start, end]."""
    bound = _hermite_support(length)
    lower, upper = max(start, -bound), min(end, bound)

    if lower >= upper:
        moments = np.zeros(length)
    else:
        spec = get_config().inner_product_quadrature
        moments = np.real(
            integrate_complex(lambda x: hermite_functions(x, length), lower, upper, spec)
        )

    logger.debug("Computed %s Hermite moments on [%s, %s]", length, start, end)
    moments.setflags(write=False)
    return moments


def indicator_moments(start: float, end: float, length: int) -> np.ndarray:
    """
    Return (1_[start,end], e_k) for k < length.

    Moments are computed in blocks of at least 16 and cached, so that probes of
    varying length share one quadrature.
    """
    padded = max(16, 1 << max(0, length - 1).bit_length())
    return _indicator_moments(float(start), float(end), padded)[:length]


# ----------------------- Function elements
class FunctionElement(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def is_schwartz(self) -> bool:
        raise NotImplementedError

    def scaled(self, weight: complex) -> "FunctionElement":
        return Combination(terms=((complex(weight), self),))

    def conjugate(self) -> "FunctionElement":
        raise NotImplementedError

    def __add__(self, other: "FunctionElement") -> "FunctionElement":
        if isinstance(self, HermiteSpan) and isinstance(other, HermiteSpan):
            length = max(len(self.coeffs), len(other.coeffs))
            return HermiteSpan.from_array(
                _padded(self.array, length) + _padded(other.array, length)
            )

        return Combination(terms=((1.0 + 0j, self), (1.0 + 0j, other)))


class Indicator(FunctionElement):
    """1_[start, end]; half-open and closed intervals are the same L^2 element."""

    start: float
    end: float

    @model_validator(mode="after")
    def _check_order(self) -> "Indicator":
        if not self.end > self.start:
            raise ValueError(f"indicator needs end > start, got [{self.start}, {self.end}]")
        return self

    @property
    def is_schwartz(self) -> bool:
        return False

    def conjugate(self) -> "Indicator":
        return self


class HermiteSpan(FunctionElement):
    coeffs: Annotated[tuple[complex, ...], Field(max_length=MAX_HERMITE_LENGTH)] = ()

    @classmethod
    def from_array(cls, coeffs: np.ndarray) -> "HermiteSpan":
        return cls(coeffs=tuple(complex(c) for c in np.asarray(coeffs).ravel()))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    @property
    def is_schwartz(self) -> bool:
        return True

    def scaled(self, weight: complex) -> "HermiteSpan":
        return HermiteSpan.from_array(self.array * weight)

    def conjugate(self) -> "HermiteSpan":
        return HermiteSpan.from_array(np.conj(self.array))

    def evaluate(self, x: float | np.ndarray) -> np.ndarray:
        return hermite_functions(x, len(self.coeffs)) @ self.array


class Combination(FunctionElement):
    terms: tuple[tuple[complex, FunctionElement], ...]

    @field_validator("terms")
    @classmethod
    def _check_terms(cls, terms: tuple) -> tuple:
        if not terms:
            raise ValueError("combination must have at least one term")
        return terms

    @property
    def is_schwartz(self) -> bool:
        return all(element.is_schwartz for _, element in self.terms)

    def scaled(self, weight: complex) -> "Combination":
        return Combination(
            terms=tuple((w * weight, element) for w, element in self.terms)
        )

    def conjugate(self) -> "Combination":
        return Combination(
            terms=tuple((w.conjugate(), element.conjugate()) for w, element in self.terms)
        )


def _padded(array: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=complex)
    out[: len(array)] = array
    return out


def zero() -> HermiteSpan:
    """The zero test function."""
    return HermiteSpan()


def hermite_basis(k: int) -> HermiteSpan:
    """The k-th Hermite function e_k."""
    coeffs = np.zeros(k + 1, dtype=complex)
    coeffs[k] = 1.0
    return HermiteSpan.from_array(coeffs)


def indicator(end: float, start: float = 0.0) -> Indicator:
    """1_[start, end], by default 1_[0, t]."""
    return Indicator(start=start, end=end)


# ----------------------- Pairing
def inner_product(f: FunctionElement, g: FunctionElement) -> complex:
    """
    The bilinear L^2 pairing (f, g).

    Args:
        f (FunctionElement): Left element
        g (FunctionElement): Right element

    Returns:
        complex: sum over the bilinear expansion; symmetric in f and g
    """
    if isinstance(f, Combination):
        return complex(sum(w * inner_product(element, g) for w, element in f.terms))

    if isinstance(g, Combination):
        return complex(sum(w * inner_product(f, element) for w, element in g.terms))

    if isinstance(f, Indicator) and isinstance(g, Indicator):
        overlap = min(f.end, g.end) - max(f.start, g.start)
        return complex(max(overlap, 0.0))

    if isinstance(f, HermiteSpan) and isinstance(g, HermiteSpan):
        length = min(len(f.coeffs), len(g.coeffs))
        return complex(np.dot(f.array[:length], g.array[:length]))

    span, interval = (f, g) if isinstance(f, HermiteSpan) else (g, f)
    if not span.coeffs:
        return 0j

    moments = indicator_moments(interval.start, interval.end, len(span.coeffs))
    return complex(np.dot(moments, span.array))


def as_hermite(f: FunctionElement) -> HermiteSpan:
    """
    Collapse a Schwartz element into a single Hermite span.

    Raises:
        RaisedNormOfNonSchwartz: If an indicator occurs in f
    """
    if isinstance(f, HermiteSpan):
        return f

    if isinstance(f, Combination) and f.is_schwartz:
        total: FunctionElement = HermiteSpan()
        for weight, element in f.terms:
            total = total + as_hermite(element).scaled(weight)
        return total

    raise RaisedNormOfNonSchwartz(
        "indicators are not Schwartz functions; only |.|_0 is defined for them"
    )


def hermite_projection(f: FunctionElement, length: int) -> HermiteSpan:
    """
    Project f onto span(e_0 ... e_{length-1}).

    Args:
        f (FunctionElement): Element to project
        length (int): Number of Hermite coefficients to keep

    Returns:
        HermiteSpan: coefficients (f, e_k), k < length
    """
    if isinstance(f, HermiteSpan):
        return HermiteSpan.from_array(_padded(f.array[:length], length))

    if isinstance(f, Indicator):
        return HermiteSpan.from_array(indicator_moments(f.start, f.end, length))

    total = np.zeros(length, dtype=complex)
    for weight, element in f.terms:
        total += weight * hermite_projection(element, length).array
    return HermiteSpan.from_array(total)


# ----------------------- Norms
class NormSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int = Field(default=0, ge=0)
    sign: NormSignLiteral = NormSign.positive


def norm(f: FunctionElement, spec: NormSpec = NormSpec()) -> float:
    """
    The Hilbertian norm |f|_p = |A^p f|_0 (or its dual |f|_{-p}).

    A = -d^2/dt^2 + t^2 + 1 acts on e_k by 2k + 2, so the norm is computed
    spectrally from Hermite coefficients.

    Args:
        f (FunctionElement): Element
        spec (NormSpec): Order p and sign

    Returns:
        float: The norm

    Raises:
        RaisedNormOfNonSchwartz: If p > 0 and f contains an indicator
    """
    if spec.p == 0:
        return math.sqrt(max(inner_product(f, f.conjugate()).real, 0.0))

    coeffs = as_hermite(f).array
    exponent = 2 * spec.p if spec.sign == NormSign.positive else -2 * spec.p
    weights = (2.0 * np.arange(len(coeffs)) + 2.0) ** exponent
    return math.sqrt(float(np.sum(weights * np.abs(coeffs) ** 2)))


def apply_oscillator(span: HermiteSpan, grid: np.ndarray) -> np.ndarray:
    """
    Sample A f = -f'' + (t^2 + 1) f on the interior of a uniform grid.

    Args:
        span (HermiteSpan): The function f
        grid (np.ndarray): Uniform grid; the two end points are dropped

    Returns:
        np.ndarray: A f at grid[1:-1]
    """
    step = grid[1] - grid[0]
    values = span.evaluate(grid)
    second = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / step**2
    inner = grid[1:-1]
    return -second + (inner**2 + 1.0) * values[1:-1]


# ----------------------- Sectors
class Sector(BaseModel):
    """The open wedge S_alpha = {z : arg z in (-pi/4 + alpha, pi/4 + alpha)}."""

    model_config = ConfigDict(frozen=True)

    alpha: float = 0.0

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, alpha: float) -> float:
        if not abs(alpha) < QUARTER_PI:
            raise ValueError(f"sector angle must satisfy |alpha| < pi/4, got {alpha}")
        return alpha

    def rotated_square(self, z: complex) -> complex:
        """z^2 e^{-2 i alpha}; its real part is positive exactly on the sector."""
        return z * z * cmath.exp(-2j * self.alpha)

    def contains(self, z: complex, margin: float | None = None) -> bool:
        return sector_contains(self, z, margin)


def sector_contains(s: Sector, z: complex, margin: float | None = None) -> bool:
    """
    Strict membership of z in the open sector.

    The angle test and the sign test Re(z^2 e^{-2i alpha}) > 0 must both hold;
    points within `margin` radians of the boundary are treated as outside.

    Raises:
        ZeroScaling: If z == 0
    """
    z = complex(z)
    if z == 0:
        raise ZeroScaling("scaling parameter z = 0 lies in no sector")

    if margin is None:
        margin = get_config().sector_margin

    angle = cmath.phase(z * cmath.exp(-1j * s.alpha))
    by_angle = abs(angle) < QUARTER_PI - margin
    by_sign = s.rotated_square(z).real > 0
    return by_angle and by_sign
