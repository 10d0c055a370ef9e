import cmath
import itertools
import math
import logging

import numpy as np
import pytest

from src.pydonsker.config import QuadratureSpec
from src.pydonsker.exception import QuadratureFailure, SectorViolation, SingularGram
from src.pydonsker.functions import HermiteSpan, Sector, hermite_basis, indicator, zero
from src.pydonsker.oracle import mollified_product_estimate
from src.pydonsker.transforms.donsker import DonskerDelta, s_scaled_delta
from src.pydonsker.transforms.products import (
    DeltaProduct,
    ProductFactor,
    gram,
    s_product,
    s_product_oracle,
)
from src.pydonsker.ufunctional import ray_analyticity_residual, scalar_cauchy_riemann

logging.basicConfig(level="INFO")

EIGHTH = cmath.exp(1j * math.pi / 8)
BROWNIAN_PAIR = (indicator(1.0), indicator(2.0))


def test_gram_of_brownian_pair():
    M = gram(BROWNIAN_PAIR)
    assert np.allclose(M.entries, [[1.0, 1.0], [1.0, 2.0]])
    assert M.log_det() == pytest.approx(0.0, abs=1e-14)


def test_dependent_family_is_singular():
    with pytest.raises(SingularGram):
        gram((indicator(1.0), indicator(1.0)))

    with pytest.raises(SingularGram):
        DeltaProduct(factors=(ProductFactor(f=hermite_basis(0)), ProductFactor(f=hermite_basis(0).scaled(2.0))))


def test_product_scaling_must_lie_in_sector():
    with pytest.raises(SectorViolation):
        DeltaProduct(z=1j, factors=(ProductFactor(f=indicator(1.0)),))


@pytest.mark.parametrize("z", [1.0, 0.8 - 0.3j, EIGHTH])
def test_single_factor_reduces_to_scaled_delta(z):
    eta = HermiteSpan(coeffs=(0.7, 0.2))
    xi = HermiteSpan(coeffs=(0.1, -0.3))
    product = DeltaProduct(z=z, factors=(ProductFactor(f=eta, a=0.4 - 0.1j),))
    single = DonskerDelta(eta=eta, a=0.4 - 0.1j, z=z)

    assert abs(s_product(product, xi) - s_scaled_delta(single, xi)) < 1e-12


def test_independent_factors_factorize():
    e0, e1 = hermite_basis(0), hermite_basis(1)
    xi = HermiteSpan(coeffs=(0.2, 0.4))
    product = DeltaProduct(factors=(ProductFactor(f=e0, a=0.1), ProductFactor(f=e1, a=-0.3)))
    expected = s_scaled_delta(DonskerDelta(eta=e0, a=0.1), xi) * s_scaled_delta(
        DonskerDelta(eta=e1, a=-0.3), xi
    )
    assert s_product(product, xi) == pytest.approx(expected, rel=1e-13)


def test_closed_form_matches_quadrature_oracle():
    product = DeltaProduct(
        z=EIGHTH,
        factors=(
            ProductFactor(f=BROWNIAN_PAIR[0], a=0.3 + 0.1j),
            ProductFactor(f=BROWNIAN_PAIR[1], a=-0.2j),
        ),
        sector=Sector(alpha=math.pi / 8),
    )
    xi = HermiteSpan(coeffs=(0.2, -0.1))
    assert abs(s_product(product, xi) - s_product_oracle(product, xi)) < 1e-6


def test_single_factor_oracle():
    product = DeltaProduct(z=0.9 + 0.2j, factors=(ProductFactor(f=indicator(1.0), a=0.5),))
    spec = QuadratureSpec(epsabs=1e-12, epsrel=1e-12)
    assert abs(s_product(product, zero()) - s_product_oracle(product, zero(), spec)) < 1e-8


def test_oracle_fails_on_the_sector_boundary():
    product = DeltaProduct(
        z=cmath.exp(1j * math.pi / 4),
        factors=(ProductFactor(f=indicator(1.0)),),
        sector=Sector(alpha=math.pi / 8),
    )
    with pytest.raises(QuadratureFailure):
        s_product_oracle(product, zero(), alpha=0.0)


def test_gram_matrices_are_positive_definite():
    rng = np.random.default_rng(8)
    for size in range(1, 7):
        family = [HermiteSpan.from_array(rng.standard_normal(8)) for _ in range(size - 1)]
        family.append(indicator(float(rng.uniform(0.5, 2.0))))
        M = gram(family)

        assert np.all(np.linalg.eigvalsh(M.entries) > 0)
        assert math.isfinite(M.log_det())


def test_product_ignores_factor_order():
    factors = (
        ProductFactor(f=BROWNIAN_PAIR[0], a=0.3),
        ProductFactor(f=BROWNIAN_PAIR[1], a=0.5 - 0.1j),
        ProductFactor(f=HermiteSpan(coeffs=(0.4, -0.2, 0.3)), a=0.1j),
    )
    xi = HermiteSpan(coeffs=(0.2, -0.1))
    values = [
        s_product(DeltaProduct(z=0.9 * EIGHTH, factors=order), xi)
        for order in itertools.permutations(factors)
    ]
    assert max(abs(value - values[0]) for value in values) < 1e-13 * abs(values[0])


@pytest.mark.parametrize("count", [2, 3])
def test_product_is_continuous_along_arcs(count):
    factors = tuple(
        ProductFactor(f=f, a=a)
        for f, a in zip((*BROWNIAN_PAIR, hermite_basis(2)), (0.3, 0.5, -0.2))
    )[:count]
    xi = HermiteSpan(coeffs=(0.2, -0.1))
    angles = np.linspace(-math.pi / 4 + 0.05, math.pi / 4 - 0.05, 400)
    values = [
        s_product(DeltaProduct(z=1.2 * cmath.exp(1j * angle), factors=factors), xi) for angle in angles
    ]

    ratios = [abs(later / earlier - 1) for earlier, later in zip(values, values[1:])]
    assert max(ratios) < 0.1


def test_product_inherits_homogeneity():
    xi = HermiteSpan(coeffs=(0.2, -0.1))
    shifts = (0.3 + 0.1j, -0.2j)
    for z in (0.7 + 0.2j, 1.3 - 0.5j, 2.0 * EIGHTH):
        scaled = DeltaProduct(
            z=z, factors=tuple(ProductFactor(f=f, a=a) for f, a in zip(BROWNIAN_PAIR, shifts))
        )
        partner = DeltaProduct(
            factors=tuple(ProductFactor(f=f, a=a / z) for f, a in zip(BROWNIAN_PAIR, shifts))
        )
        assert s_product(scaled, xi) == pytest.approx(s_product(partner, xi) / z**2, rel=1e-12)


def test_product_is_ray_analytic():
    product = DeltaProduct(
        z=0.9 * EIGHTH,
        factors=(ProductFactor(f=BROWNIAN_PAIR[0], a=0.3), ProductFactor(f=BROWNIAN_PAIR[1], a=0.5)),
    )
    residual = ray_analyticity_residual(
        lambda xi: s_product(product, xi), hermite_basis(0), hermite_basis(1)
    )
    assert residual < 1e-8


def test_product_is_analytic_in_level():
    def evaluate(a: complex) -> complex:
        product = DeltaProduct(
            z=0.9 * EIGHTH,
            factors=(ProductFactor(f=BROWNIAN_PAIR[0], a=a), ProductFactor(f=BROWNIAN_PAIR[1], a=0.5)),
        )
        return s_product(product, HermiteSpan(coeffs=(0.2, -0.1)))

    assert scalar_cauchy_riemann(evaluate, 0.3 + 0.2j) < 1e-8


@pytest.mark.slow
def test_closed_form_matches_monte_carlo():
    shifts = (0.3, 0.5)
    product = DeltaProduct(
        factors=tuple(ProductFactor(f=f, a=a) for f, a in zip(BROWNIAN_PAIR, shifts))
    )
    estimate = mollified_product_estimate(BROWNIAN_PAIR, shifts, zero(), 1_000_000, seed=11)
    assert estimate.agrees_with(s_product(product, zero()))
