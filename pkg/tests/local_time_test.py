import math
import logging

import pytest

from src.pydonsker.config import ToolkitConfig
from src.pydonsker.exception import DomainViolation, NonpositiveTime
from src.pydonsker.functions import indicator, zero
from src.pydonsker.transforms.local_time import (
    LocalTimeQuery,
    local_time_closed_form,
    mollified_local_time,
    occupation_bias_bound,
    occupation_oracle,
    s_local_time,
)
from src.pydonsker.ufunctional import ray_analyticity_residual, scalar_cauchy_riemann

logging.basicConfig(level="INFO")


def test_matches_closed_form():
    expected = math.sqrt(2 / math.pi) * math.exp(-0.5) - math.erfc(1 / math.sqrt(2))
    value = s_local_time(LocalTimeQuery(t=1.0, a=1.0), zero())

    assert abs(value - expected) < 1e-10
    assert local_time_closed_form(1.0, 1.0) == pytest.approx(expected, rel=1e-14)


def test_complex_level_matches_closed_form():
    q = LocalTimeQuery(t=1.0, a=0.8 + 0.3j)
    assert abs(s_local_time(q, zero()) - local_time_closed_form(1.0, 0.8 + 0.3j)) < 1e-10


def test_level_outside_sector_is_rejected():
    with pytest.raises(DomainViolation):
        LocalTimeQuery(t=1.0, a=1j)

    with pytest.raises(DomainViolation):
        LocalTimeQuery(t=1.0, a=-1.0)

    with pytest.raises(DomainViolation):
        local_time_closed_form(1.0, -0.8 - 0.3j)

    with pytest.raises(NonpositiveTime):
        LocalTimeQuery(t=0.0, a=1.0)


def test_vanishes_as_time_shrinks():
    values = [s_local_time(LocalTimeQuery(t=t, a=1.0), zero()).real for t in (1.0, 0.5, 0.1, 0.01)]
    assert values[0] > values[1] > values[2] > values[3] >= 0
    assert values[3] < 1e-12


def test_additivity_in_time():
    q = LocalTimeQuery(t=1.0, a=0.7)
    head = s_local_time(LocalTimeQuery(t=0.4, a=0.7), zero())
    tail = s_local_time(q, zero(), start=0.4)
    assert abs(head + tail - s_local_time(q, zero())) < 1e-10


def test_analytic_in_level():
    residual = scalar_cauchy_riemann(
        lambda a: s_local_time(LocalTimeQuery(t=1.0, a=a), zero()), 1.0 + 0.2j
    )
    assert residual < 1e-6


def test_ray_analytic_in_test_function():
    q = LocalTimeQuery(t=1.0, a=1.0)
    residual = ray_analyticity_residual(
        lambda xi: s_local_time(q, xi), indicator(1.0), indicator(1.0).scaled(0.2)
    )
    assert residual < 1e-6


def test_occupation_at_time_zero():
    estimate = occupation_oracle(0.0, 1.0, 0.05, 100, 10, seed=0)
    assert estimate.re == 0.0 and estimate.stderr == 0.0


def test_occupation_matches_band_expectation():
    estimate = occupation_oracle(1.0, 1.0, 0.1, 4000, 500, seed=2)
    band = mollified_local_time(1.0, 1.0, 0.1)
    grid = occupation_bias_bound(1.0, 1.0, 0.1, 500)
    assert estimate.agrees_with(band, bias=grid)


def test_occupation_is_worker_independent():
    config = ToolkitConfig(path_block=64)
    one = occupation_oracle(1.0, 0.5, 0.1, 1000, 200, seed=4, workers=1, config=config)
    three = occupation_oracle(1.0, 0.5, 0.1, 1000, 200, seed=4, workers=3, config=config)
    assert one == three


def test_band_bias_is_declared():
    exact = local_time_closed_form(1.0, 1.0).real
    band = mollified_local_time(1.0, 1.0, 0.05)
    assert abs(band - exact) <= occupation_bias_bound(1.0, 1.0, 0.05, 10_000)


@pytest.mark.slow
def test_occupation_oracle_agrees_with_local_time():
    estimate = occupation_oracle(1.0, 1.0, 0.05, 100_000, 10_000, seed=1)
    value = s_local_time(LocalTimeQuery(t=1.0, a=1.0), zero())
    assert estimate.agrees_with(value.real, bias=occupation_bias_bound(1.0, 1.0, 0.05, 10_000))


@pytest.mark.slow
def test_halving_band_is_stable():
    wide = occupation_oracle(1.0, 1.0, 0.05, 20_000, 2000, seed=6)
    narrow = occupation_oracle(1.0, 1.0, 0.025, 20_000, 2000, seed=6)
    assert abs(wide.re - narrow.re) <= 3 * math.hypot(wide.stderr, narrow.stderr)
