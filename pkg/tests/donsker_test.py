import cmath
import math
import logging

import numpy as np
import pytest

from src.pydonsker.exception import NonpositiveTime, SectorViolation, ZeroScaling
from src.pydonsker.functions import HermiteSpan, Sector, hermite_basis, indicator, zero
from src.pydonsker.transforms.donsker import (
    DonskerDelta,
    approximant_certificate,
    approximant_pointwise,
    approximant_tail_bound,
    approximant_ufunctional,
    brownian_delta,
    delta_certificate,
    homogeneous_partner,
    packaged_approximants,
    s_approximant,
    s_delta,
    s_scaled_delta,
    scaling_continuity_check,
    singularity_order,
    t_scaled_delta,
)
from src.pydonsker.oracle import estimate_transform
from src.pydonsker.ufunctional import (
    check_sequence,
    ray_analyticity_residual,
    s_from_t,
    scalar_cauchy_riemann,
)

logging.basicConfig(level="INFO")

ETA = HermiteSpan(coeffs=(1.0, 0.5))
XIS = [zero(), hermite_basis(0).scaled(0.3), HermiteSpan(coeffs=(0.1, -0.2, 0.3))]
EIGHTH = cmath.exp(1j * math.pi / 8)


def test_delta_at_origin():
    assert s_delta(1.0, 0.0, zero()) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)


def test_delta_needs_positive_time():
    with pytest.raises(NonpositiveTime):
        s_delta(0.0, 0.0, zero())

    with pytest.raises(NonpositiveTime):
        brownian_delta(-1.0)


def test_scaling_outside_sector():
    with pytest.raises(SectorViolation):
        DonskerDelta(eta=ETA, z=cmath.exp(1j * math.pi / 4))

    with pytest.raises(ZeroScaling):
        DonskerDelta(eta=ETA, z=0)


def test_unscaled_delta_matches_brownian_form():
    xi = HermiteSpan(coeffs=(0.2, 0.1))
    d = brownian_delta(1.5, 0.4 + 0.1j)
    assert s_scaled_delta(d, xi) == pytest.approx(s_delta(1.5, 0.4 + 0.1j, xi), rel=1e-13)


def test_homogeneity_of_degree_minus_one():
    xi = HermiteSpan(coeffs=(0.2, -0.3, 0.1))
    for z in (0.7 + 0.2j, 1.3 - 0.5j, 2.0 * EIGHTH):
        d = DonskerDelta(eta=indicator(1.0), a=0.3 - 0.4j, z=z)
        partner = homogeneous_partner(d)
        assert abs(s_scaled_delta(d, xi) - s_scaled_delta(partner, xi) / z) < 1e-12


def test_s_and_t_transforms_agree():
    d = DonskerDelta(eta=ETA, a=0.2 + 0.3j, z=0.9 + 0.3j)
    xi = HermiteSpan(coeffs=(0.1, 0.4))
    assert s_from_t(lambda x: t_scaled_delta(d, x), xi) == pytest.approx(
        s_scaled_delta(d, xi), rel=1e-13
    )


def test_singularity_order():
    orders = [singularity_order(delta_certificate(brownian_delta(1.0), s).K2, 0) for s in (1, 0.1, 0.01)]
    expected = [math.log(0.5 * (1 + s * s)) / (2 * math.log(2)) + 1 for s in (1, 0.1, 0.01)]

    assert orders == pytest.approx(expected, rel=1e-15)
    assert orders[0] > orders[1] > orders[2] > 0.5
    assert orders[2] == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("z", [1.0, EIGHTH])
def test_approximants_converge(z):
    specs = packaged_approximants(ETA, (4, 8, 16, 32))
    cert = approximant_certificate(specs[0], z, 0.3)
    report = check_sequence([approximant_ufunctional(spec, z, 0.3) for spec in specs], XIS, cert)

    assert report.verdict
    assert report.bound_violations == 0

    limit = DonskerDelta(eta=ETA, a=0.3, z=z)
    for xi in XIS:
        assert abs(s_approximant(specs[-1], z, 0.3, xi) - s_scaled_delta(limit, xi)) < 1e-6


@pytest.mark.parametrize("z", [1.0, EIGHTH])
def test_approximants_do_not_depend_on_contour(z):
    straight = packaged_approximants(ETA, (32,), alpha=0.0)[0]
    rotated = packaged_approximants(ETA, (32,), alpha=0.2)[0]
    xi = XIS[2]
    assert abs(s_approximant(straight, z, 0.3, xi) - s_approximant(rotated, z, 0.3, xi)) < 1e-6


def test_approximant_tail_bound_covers_truncation():
    spec = packaged_approximants(ETA, (2,))[0]
    limit = s_scaled_delta(DonskerDelta(eta=ETA, a=0.3), XIS[1])
    gap = abs(s_approximant(spec, 1.0, 0.3, XIS[1]) - limit)
    assert gap <= approximant_tail_bound(spec, 1.0, 0.3, XIS[1]) + 1e-10
    assert spec.projection_error == 0.0


def test_indicator_approximants_close_in_on_brownian_delta():
    specs = packaged_approximants(indicator(1.0), (4, 8, 16, 32))
    errors = [spec.projection_error for spec in specs]
    assert all(0 < later < earlier for earlier, later in zip(errors, errors[1:]))

    for xi in (zero(), hermite_basis(0).scaled(0.3)):
        limit = s_delta(1.0, 0.3, xi)
        gaps = [abs(s_approximant(spec, 1.0, 0.3, xi) - limit) for spec in specs]
        bounds = [approximant_tail_bound(spec, 1.0, 0.3, xi) for spec in specs]

        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
        assert all(gap <= bound for gap, bound in zip(gaps, bounds))
        assert gaps[-1] < 0.01
        assert bounds[-1] < 0.1


def test_indicator_bound_is_not_vacuous():
    spec = packaged_approximants(indicator(1.0), (32,))[0]
    gap = abs(s_approximant(spec, 1.0, 0.3, zero()) - s_delta(1.0, 0.3, zero()))
    assert gap <= approximant_tail_bound(spec, 1.0, 0.3, zero()) < 10 * gap


def test_approximant_pointwise_peak():
    spec = packaged_approximants(ETA, (4,))[0]
    values = approximant_pointwise(spec, 1.0, 0.3, np.array([0.3, 0.3 + math.pi / 4]))
    assert values[0] == pytest.approx(4 / math.pi)
    assert abs(values[1]) < 1e-12


@pytest.mark.slow
def test_approximant_pointwise_reconstructs_its_transform():
    spec = packaged_approximants(ETA, (4,))[0]
    xi = XIS[1]
    estimate = estimate_transform(
        "S",
        lambda X: approximant_pointwise(spec, 1.0, 0.3, X[:, 0]),
        [spec.eta_n],
        xi,
        1_000_000,
        seed=17,
    )
    assert estimate.agrees_with(s_approximant(spec, 1.0, 0.3, xi), sigmas=4)


def test_scaling_continuity():
    d = brownian_delta(1.0, 0.2)
    z_sequence = [1.0 + 0.5 * 2.0**-k * EIGHTH for k in range(6)]
    report = scaling_continuity_check(d, z_sequence, XIS)
    assert report.verdict


def test_alternating_scaling_does_not_converge():
    d = brownian_delta(1.0, 0.2)
    report = scaling_continuity_check(d, [1.0, EIGHTH] * 3, XIS)

    assert not report.verdict
    assert report.bound_violations == 0
    assert len(set(report.gaps)) == 1
    assert report.gaps[0] > 0.01


def test_scaled_delta_is_ray_analytic():
    d = DonskerDelta(eta=ETA, a=0.2 - 0.1j, z=0.9 * EIGHTH)
    residual = ray_analyticity_residual(
        lambda xi: s_scaled_delta(d, xi), hermite_basis(0), hermite_basis(1)
    )
    assert residual < 1e-8


def test_scaled_delta_is_analytic_in_level():
    xi = XIS[2]
    residual = scalar_cauchy_riemann(
        lambda a: s_scaled_delta(DonskerDelta(eta=ETA, a=a, z=0.9 * EIGHTH), xi), 0.3 + 0.2j
    )
    assert residual < 1e-8


def test_sector_of_approximant_is_checked():
    spec = packaged_approximants(ETA, (4,))[0]
    with pytest.raises(SectorViolation):
        s_approximant(spec, 1j, 0.0, zero())

    assert spec.sector == Sector()
