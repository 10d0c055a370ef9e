import math
import logging

import numpy as np
import pytest

from src.pydonsker.config import ToolkitConfig
from src.pydonsker.exception import DomainViolation, SingularGram
from src.pydonsker.functions import hermite_basis, indicator, zero
from src.pydonsker.oracle import (
    estimate_transform,
    gaussian_embedding,
    jackknife,
    mollified_delta,
    mollified_product_estimate,
    real_gram,
    richardson_weights,
    sample_pairings,
    simulate_paths,
    wick_identity_check,
)
from src.pydonsker.transforms.donsker import s_delta
from src.pydonsker.ufunctional import characteristic_functional

logging.basicConfig(level="INFO")

BLOCKS = ToolkitConfig(seed_block=1000)


def test_pairings_have_gram_covariance():
    samples = np.concatenate(
        [s.values for s in sample_pairings([indicator(1.0), indicator(2.0)], 40_000, seed=3)]
    )
    assert samples.shape == (40_000, 2)
    assert np.allclose(np.cov(samples.T), [[1.0, 1.0], [1.0, 2.0]], atol=0.05)


@pytest.mark.slow
def test_pairing_covariance_at_full_size():
    family = [indicator(1.0), indicator(2.0), hermite_basis(0)]
    samples = np.concatenate([s.values for s in sample_pairings(family, 1_000_000, seed=19)])

    assert samples.shape == (1_000_000, 3)
    assert np.allclose(samples.mean(axis=0), 0.0, atol=0.006)
    assert np.allclose(np.cov(samples.T), real_gram(family), atol=0.012)


def test_dependent_family_is_rejected():
    with pytest.raises(SingularGram):
        list(sample_pairings([indicator(1.0), indicator(1.0)], 10, seed=0))

    with pytest.raises(SingularGram):
        estimate_transform("T", lambda X: X[:, 0], [indicator(1.0), indicator(1.0)], zero(), 10, seed=0)


def test_complex_family_is_rejected():
    with pytest.raises(DomainViolation):
        list(sample_pairings([hermite_basis(0).scaled(1 + 1j)], 10, seed=0))


def test_embedding_skips_dependent_directions():
    A, pivots = gaussian_embedding(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 4.0]]))
    assert pivots == [0, 2]
    assert np.allclose(A @ A.T, [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 4.0]])


@pytest.mark.parametrize("workers", [2, 8])
def test_estimate_is_worker_independent(workers):
    args = ("T", lambda X: X[:, 0] ** 2, [indicator(1.0)], hermite_basis(1).scaled(0.3), 5000)
    one = estimate_transform(*args, seed=5, workers=1, config=BLOCKS)
    many = estimate_transform(*args, seed=5, workers=workers, config=BLOCKS)
    assert one == many


def test_constant_functional():
    xi = hermite_basis(0).scaled(0.5) + hermite_basis(2).scaled(0.2)
    t = estimate_transform("T", lambda X: np.ones(len(X)), [], xi, 50_000, seed=1, config=BLOCKS)
    assert t.agrees_with(characteristic_functional(xi), sigmas=4)

    s = estimate_transform(
        "S", lambda X: np.ones(len(X)), [], hermite_basis(0).scaled(0.3 + 0.4j), 50_000, seed=2
    )
    assert s.agrees_with(1.0, sigmas=4)


def test_wick_identity():
    estimate, expected = wick_identity_check(
        hermite_basis(0).scaled(0.5), indicator(1.0), 50_000, seed=9, config=BLOCKS
    )
    assert estimate.agrees_with(expected, sigmas=4)


def test_mollified_single_delta():
    estimate = mollified_product_estimate([indicator(1.0)], [0.5], zero(), 50_000, seed=4)
    assert estimate.agrees_with(s_delta(1.0, 0.5, zero()), sigmas=4)


@pytest.mark.slow
@pytest.mark.parametrize(
    "t, a, xi",
    [
        (1.0, 0.5, zero()),
        (1.0, 0.5, indicator(1.0)),
        (2.0, 1.0, hermite_basis(0)),
    ],
)
def test_mollified_delta_matches_closed_form(t, a, xi):
    estimate = mollified_product_estimate([indicator(t)], [a], xi, 1_000_000, seed=21)
    assert estimate.agrees_with(s_delta(t, a, xi))


def test_mollified_kernel_is_normalized():
    x = np.linspace(-3.0, 3.0, 20001)
    for eps in (0.1, 0.025):
        assert np.trapezoid(mollified_delta(x, eps), x) == pytest.approx(1.0, abs=1e-9)


def test_richardson_weights():
    weights = richardson_weights()
    assert weights == pytest.approx([1 / 3, -2.0, 8 / 3], abs=1e-12)
    assert sum(weights) == pytest.approx(1.0, abs=1e-12)


def test_jackknife_of_constant():
    mean, stderr = jackknife(np.full(1000, 2.0 + 1.0j))
    assert mean == 2.0 + 1.0j
    assert stderr == 0.0

    with pytest.raises(ValueError):
        jackknife(np.ones(1))


def test_jackknife_error_scales():
    rng = np.random.default_rng(0)
    values = rng.standard_normal(40_000)
    _, stderr = jackknife(values)
    assert stderr == pytest.approx(1.0 / math.sqrt(40_000), rel=0.3)


def test_brownian_paths():
    paths = list(simulate_paths(1.0, 4, 5000, seed=8))
    assert len(paths) == 5000
    assert np.allclose(paths[0].times, [0.0, 0.25, 0.5, 0.75, 1.0])

    values = np.array([p.values for p in paths])
    assert np.all(values[:, 0] == 0.0)
    assert np.var(values[:, 4]) == pytest.approx(1.0, abs=0.1)
    assert np.cov(values[:, 2], values[:, 4])[0, 1] == pytest.approx(0.5, abs=0.1)
