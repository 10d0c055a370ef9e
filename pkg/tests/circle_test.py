import cmath
import math
import logging

import numpy as np
import pytest

from src.pydonsker.exception import NonpositiveTime
from src.pydonsker.functions import Combination, hermite_basis, indicator, zero
from src.pydonsker.transforms.circle import (
    CircleState,
    WavePacket,
    circle_bound,
    circle_heat_kernel,
    evolve,
    feynman_integral,
    localized_divergence_check,
    residual_grid,
    schroedinger_residual,
    t_circle,
    t_free_integrand,
)
from src.pydonsker.ufunctional import (
    characteristic_functional,
    probe_generator,
    random_probe,
    ray_analyticity_residual,
)

logging.basicConfig(level="INFO")

SQRT_I = cmath.exp(1j * math.pi / 4)


def test_free_integrand():
    assert t_free_integrand(zero()) == 1
    assert t_free_integrand(hermite_basis(0)) == pytest.approx(cmath.exp(-0.5j), abs=1e-15)

    xi = Combination(terms=((0.4, indicator(1.0)), (0.7 - 0.2j, hermite_basis(2))))
    assert t_free_integrand(xi) == pytest.approx(characteristic_functional(xi.scaled(SQRT_I)), rel=1e-12)


def test_free_integrand_is_unimodular_for_real_xi():
    xi = Combination(terms=((1.3, indicator(2.0, 0.5)), (-0.4, hermite_basis(1))))
    assert abs(t_free_integrand(xi)) == pytest.approx(1.0, abs=1e-14)


def test_constant_packet_reduces_to_free_integrand():
    state = CircleState(phi0=0.3, t=1.7, packet=WavePacket(coeffs={0: 1}))
    xi = hermite_basis(1).scaled(0.5)

    assert t_circle(state, xi) == pytest.approx(t_free_integrand(xi), abs=1e-15)


def test_single_mode_at_half_period():
    state = CircleState(phi0=0.0, t=math.pi, packet=WavePacket(coeffs={1: 1}))

    assert t_circle(state, zero()) == pytest.approx(-1j, abs=1e-15)
    assert feynman_integral(state) == pytest.approx(-1j, abs=1e-15)


def test_feynman_integral_examples():
    assert feynman_integral(CircleState(phi0=2.1, t=0.9, packet=WavePacket(coeffs={0: 1}))) == 1

    at_zero = CircleState(phi0=math.pi / 2, t=0.0, packet=WavePacket(coeffs={1: 1}))
    assert feynman_integral(at_zero) == pytest.approx(1j, abs=1e-15)

    for t in (0.3, 1.0, 4.2):
        state = CircleState(phi0=0.0, t=t, packet=WavePacket(coeffs={1: 1, -1: 1}))
        assert feynman_integral(state) == pytest.approx(2 * cmath.exp(-0.5j * t), abs=1e-14)


def test_transform_needs_positive_time():
    state = CircleState(t=0.0, packet=WavePacket(coeffs={1: 1}))
    with pytest.raises(NonpositiveTime):
        t_circle(state, zero())

    with pytest.raises(NonpositiveTime):
        CircleState(t=-1.0, packet=WavePacket(coeffs={1: 1}))


def test_packet_modes_are_bounded():
    with pytest.raises(ValueError):
        WavePacket(coeffs={513: 1})


def test_uniform_bound_holds_on_random_probes():
    packet = WavePacket(coeffs={0: 0.5, 1: 1, -2: 0.3j, 3: 0.1}, s=0.8)
    state = CircleState(phi0=0.4, t=1.5, packet=packet)

    violations = 0
    for index in range(1000):
        rng = probe_generator(11, index)
        real, imag = random_probe(rng, 6), random_probe(rng, 6)
        xi = real + imag.scaled(0.5j)
        if abs(t_circle(state, xi)) > circle_bound(state, xi) * (1 + 1e-12):
            violations += 1

    assert violations == 0


def test_transform_is_ray_analytic():
    packet = WavePacket(coeffs={0: 0.5, 1: 1, -2: 0.3j, 3: 0.1}, s=0.8)
    state = CircleState(phi0=0.4, t=1.5, packet=packet)
    residual = ray_analyticity_residual(
        lambda xi: t_circle(state, xi), hermite_basis(0), indicator(1.0)
    )
    assert residual < 1e-8


def test_mode_evolution_is_unitary():
    packet = WavePacket(coeffs={1: 0.6, -3: 0.2 + 0.1j, 5: -0.4})
    total = sum(abs(a) for a in packet.coeffs.values())

    for t in np.linspace(0.0, 10.0, 21):
        assert abs(feynman_integral(CircleState(phi0=1.1, t=t, packet=packet))) <= total + 1e-14


def test_periodic_in_initial_angle():
    packet = WavePacket(coeffs={1: 1, 2: 0.3, -4: 0.2j})
    for phi0 in (0.0, 0.7, 3.0):
        here = feynman_integral(CircleState(phi0=phi0, t=0.8, packet=packet))
        there = feynman_integral(CircleState(phi0=phi0 + 2 * math.pi, t=0.8, packet=packet))
        assert here == pytest.approx(there, abs=1e-13)


def test_evolution_is_a_semigroup():
    packet = WavePacket(coeffs={1: 1, 2: 0.3, -7: 0.5j})
    twice = evolve(evolve(packet, 0.4), 1.1)
    once = evolve(packet, 1.5)

    for l, a in once.coeffs.items():
        assert twice.coeffs[l] == pytest.approx(a, abs=1e-14)


def test_constant_packet_has_zero_residual():
    packet = WavePacket(coeffs={0: 1})
    phi = np.linspace(0.0, 2 * np.pi, 10, endpoint=False)
    assert schroedinger_residual(packet, phi, np.linspace(0.1, 2.0, 10)) == 0.0


def test_single_mode_residual():
    packet = WavePacket(coeffs={1: 1})
    phi = np.linspace(0.0, 2 * np.pi, 20, endpoint=False)
    assert schroedinger_residual(packet, phi, np.linspace(0.1, 2.0, 20), h=1e-3) < 1e-5


def test_residual_is_second_order():
    packet = WavePacket(coeffs={1: 1, 2: 0.3})
    phi = np.linspace(0.0, 2 * np.pi, 50, endpoint=False)
    t = np.linspace(0.1, 2.0, 50)

    coarse = schroedinger_residual(packet, phi, t, h=1e-3)
    fine = schroedinger_residual(packet, phi, t, h=5e-4)

    assert coarse < 1e-4
    assert 3.5 <= coarse / fine <= 4.5


def test_residual_grid_is_worker_independent():
    packet = WavePacket(coeffs={1: 1, 2: 0.3})
    phi = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    t = np.linspace(0.1, 1.0, 5)

    one = residual_grid(packet, phi, t, workers=1)
    four = residual_grid(packet, phi, t, workers=4)

    assert one.shape == (40, 5)
    np.testing.assert_array_equal(one, four)


def test_heat_kernel_matches_wrapped_sum():
    t, shift = 0.7, 0.9
    direct = sum(
        math.exp(-((shift - 2 * math.pi * n) ** 2) / (2 * t)) / math.sqrt(2 * math.pi * t)
        for n in range(-30, 31)
    )
    assert circle_heat_kernel(t, shift, 0.0) == pytest.approx(direct, rel=1e-12)


def test_localized_endpoints_diverge():
    report = localized_divergence_check(1.0, 0.5, 0.0)

    assert report.diverges
    assert "does not converge" in report.message
    assert report.tau.imag == 0.0
    assert report.heat_kernel.real > 0
    assert report.partial_sum_diverges
    assert report.growth_exponent == pytest.approx(0.0, abs=1e-9)
    assert max(report.term_moduli) - min(report.term_moduli) < 1e-9 * max(report.term_moduli)
