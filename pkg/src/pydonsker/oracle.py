"""
Monte Carlo ground truth.

The white noise measure is realized only through finite-dimensional Gaussian
marginals: pairings <w, f_1> ... <w, f_n> drawn with covariance gram(f), and
Brownian paths B(t) = <w, 1_[0,t]> on a time grid. Every block of samples has
its own counter-based substream keyed by (seed, block index), so results do
not depend on the worker count.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from .config import ToolkitConfig, get_config
from .enums import RandomStream, TransformKind
from .exception import DomainViolation, SingularGram
from .functions import FunctionElement, inner_product
from .types import TransformKindLiteral
from .ufunctional import characteristic_functional, probe_generator

logger = logging.getLogger("pydonsker")

RICHARDSON_EPSILONS = (0.1, 0.05, 0.025)
# squared residual norm (relative) below which a direction counts as dependent
SPAN_TOLERANCE = 1e-10


class OracleEstimate(BaseModel):
    re: float
    im: float
    stderr: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def agrees_with(self, expected: complex, sigmas: float = 3.0, bias: float = 0.0) -> bool:
        return abs(self.value - expected) <= sigmas * self.stderr + bias


class PairingSample(BaseModel):
    """A block of jointly Gaussian pairings, one row (<w, f_1>, ..., <w, f_n>) per sample."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    index: int
    values: np.ndarray


class BrownianPath(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    values: np.ndarray


class PathBlock(BaseModel):
    """Brownian paths sharing one time grid, one row per path; column 0 is B(0) = 0."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    index: int
    times: np.ndarray
    values: np.ndarray


# ----------------------- Helpers
def _ordered_map(func: Callable[[int], object], count: int, workers: int) -> Iterator:
    # bounded waves keep memory flat while preserving order
    with ThreadPoolExecutor(max_workers=workers) as pool:
        wave = 4 * workers
        for first in range(0, count, wave):
            yield from pool.map(func, range(first, min(count, first + wave)))


def _block_sizes(N: int, block: int) -> list[int]:
    return [min(block, N - start) for start in range(0, N, block)]


def real_gram(elements: Sequence[FunctionElement]) -> np.ndarray:
    n = len(elements)
    G = np.empty((n, n), dtype=complex)
    for k in range(n):
        for l in range(k, n):
            G[k, l] = G[l, k] = inner_product(elements[k], elements[l])

    if n and np.max(np.abs(G.imag)) > 1e-12 * max(float(np.max(np.abs(G))), 1.0):
        raise DomainViolation("pairings can only be sampled for real elements")
    return G.real


def gaussian_embedding(G: np.ndarray, tol: float = SPAN_TOLERANCE) -> tuple[np.ndarray, list[int]]:
    """
    Factor G = A A^T, skipping directions already in the span of earlier ones.

    Cholesky run in the given order; a direction whose residual norm^2 is at
    most tol * G_jj contributes no new column (its pairing is then a fixed
    combination of the earlier ones).

    Returns:
        tuple[np.ndarray, list[int]]: A with one column per independent
            direction, and the indices of those directions
    """
    m = len(G)
    A = np.zeros((m, m))
    pivots: list[int] = []

    for j in range(m):
        row = np.zeros(m)
        for k, p in enumerate(pivots):
            row[k] = (G[j, p] - row[:k] @ A[p, :k]) / A[p, k]

        rank = len(pivots)
        residual = G[j, j] - row[:rank] @ row[:rank]
        if G[j, j] > 0 and residual > tol * G[j, j]:
            row[rank] = math.sqrt(residual)
            pivots.append(j)
        A[j] = row

    return A[:, : len(pivots)], pivots


def jackknife(values: np.ndarray, blocks: int = 100) -> tuple[complex, float]:
    """
    Mean and leave-one-block-out standard error of complex samples.

    Block sums are exact (math.fsum), so the result does not depend on how
    the samples were produced in parallel.
    """
    values = np.asarray(values, dtype=complex)
    N = len(values)
    if N < 2:
        raise ValueError("jackknife needs at least 2 samples")

    groups = np.array_split(values, min(blocks, N))
    sums = np.array(
        [complex(math.fsum(g.real.tolist()), math.fsum(g.imag.tolist())) for g in groups]
    )
    sizes = np.array([len(g) for g in groups])
    total = complex(math.fsum(sums.real.tolist()), math.fsum(sums.imag.tolist()))

    leave_out = (total - sums) / (N - sizes)
    center = leave_out.mean()
    B = len(groups)
    variance = (B - 1) / B * float(np.sum(np.abs(leave_out - center) ** 2))
    return total / N, math.sqrt(variance)


def mollified_delta(x: np.ndarray, eps: float) -> np.ndarray:
    """Gaussian kernel (2 pi eps)^{-1/2} exp(-x^2 / 2 eps); eps is its variance."""
    x = np.asarray(x)
    return np.exp(-(x**2) / (2.0 * eps)) / np.sqrt(2.0 * np.pi * eps)


def richardson_weights(epsilons: Sequence[float] = RICHARDSON_EPSILONS) -> np.ndarray:
    """Lagrange weights extrapolating values at the given eps to eps = 0."""
    eps = np.asarray(epsilons, dtype=float)
    weights = np.ones(len(eps))
    for k in range(len(eps)):
        for j in range(len(eps)):
            if j != k:
                weights[k] *= eps[j] / (eps[j] - eps[k])
    return weights


# ----------------------- Sampling
def sample_pairings(
    family: Sequence[FunctionElement],
    N: int,
    seed: int,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> Iterator[PairingSample]:
    """
    Draw N samples of the pairings with the family, in blocks.

    Args:
        family (Sequence[FunctionElement]): Real elements with a positive
            definite Gram matrix
        N (int): Number of samples
        seed (int): Seed
        workers (int, optional): Threads, defaults to the configuration
        config (ToolkitConfig, optional): Block size

    Yields:
        PairingSample: Consecutive blocks

    Raises:
        SingularGram: If the family is linearly dependent
    """
    config = config or get_config()
    workers = workers or config.workers

    A, pivots = gaussian_embedding(real_gram(family))
    if len(pivots) < len(family):
        logger.error("Pairing family is linearly dependent")
        raise SingularGram("family is numerically linearly dependent")

    sizes = _block_sizes(N, config.seed_block)
    logger.info("Sampling %s pairings of %s elements in %s blocks", N, len(family), len(sizes))

    def draw(index: int) -> PairingSample:
        rng = probe_generator(seed, index, RandomStream.pairings)
        Z = rng.standard_normal((sizes[index], A.shape[1]))
        return PairingSample(index=index, values=Z @ A.T)

    yield from _ordered_map(draw, len(sizes), workers)


def _split_parts(xi: FunctionElement) -> tuple[FunctionElement, FunctionElement]:
    conj = xi.conjugate()
    return (xi + conj).scaled(0.5), (xi + conj.scaled(-1.0)).scaled(-0.5j)


def estimate_transform(
    kind: TransformKindLiteral,
    functional: Callable[[np.ndarray], np.ndarray],
    family: Sequence[FunctionElement],
    xi: FunctionElement,
    N: int,
    seed: int,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> OracleEstimate:
    """
    Estimate the S- or T-transform of a cylinder functional.

    T Phi(xi) = E[Phi exp(i <w, xi>)] and S Phi(xi) = E[Phi :exp <w, xi>:]
    with the Wick weight C(xi) exp(<w, xi>). The pairing with xi is sampled
    jointly with the family; when xi lies in the span of the family it is
    expressed through the family pairings (Schur complement), otherwise an
    independent normal carries its orthogonal part.

    Args:
        kind (TransformKindLiteral): "S" or "T"
        functional (Callable): Maps an (m, n) array of family pairings to m values
        family (Sequence[FunctionElement]): Real pairing directions (may be empty)
        xi (FunctionElement): Test function, complex coefficients allowed
        N (int): Number of samples
        seed (int): Seed
        workers (int, optional): Threads
        config (ToolkitConfig, optional): Block sizes, jackknife blocks

    Returns:
        OracleEstimate: estimate with jackknife standard error
    """
    config = config or get_config()
    workers = workers or config.workers
    n = len(family)

    real_part, imag_part = _split_parts(xi)
    A, pivots = gaussian_embedding(real_gram([*family, real_part, imag_part]))
    if len(pivots) < n or pivots[:n] != list(range(n)):
        logger.error("Pairing family is linearly dependent")
        raise SingularGram("family is numerically linearly dependent")

    wick = characteristic_functional(xi)
    sizes = _block_sizes(N, config.seed_block)
    logger.info("Estimating %s-transform from %s samples (%s blocks)", kind, N, len(sizes))

    def draw(index: int) -> np.ndarray:
        rng = probe_generator(seed, index, RandomStream.pairings)
        Z = rng.standard_normal((sizes[index], A.shape[1]))
        pairings = Z @ A.T
        with_xi = pairings[:, n] + 1j * pairings[:, n + 1]

        if kind == TransformKind.s:
            weight = wick * np.exp(with_xi)
        else:
            weight = np.exp(1j * with_xi)
        return np.asarray(functional(pairings[:, :n]), dtype=complex) * weight

    values = np.concatenate(list(_ordered_map(draw, len(sizes), workers)))
    mean, stderr = jackknife(values, config.jackknife_blocks)

    logger.debug("Estimate %s +- %.3e", mean, stderr)
    return OracleEstimate(re=mean.real, im=mean.imag, stderr=stderr)


def mollified_product_estimate(
    family: Sequence[FunctionElement],
    shifts: Sequence[complex],
    xi: FunctionElement,
    N: int,
    seed: int,
    epsilons: Sequence[float] = RICHARDSON_EPSILONS,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> OracleEstimate:
    """
    S-transform of prod_j delta(<., f_j> - a_j) by mollified Monte Carlo.

    Each sample carries the Richardson combination sum_k w_k prod_j
    delta_{eps_k}(<w, f_j> - a_j), so the extrapolation to eps = 0 happens
    per sample and the jackknife error covers it.
    """
    if len(shifts) != len(family):
        raise ValueError("one shift per family element is required")

    weights = richardson_weights(epsilons)
    a = np.asarray(shifts, dtype=complex)

    def combined(X: np.ndarray) -> np.ndarray:
        total = np.zeros(len(X), dtype=complex)
        for w, eps in zip(weights, epsilons):
            total += w * np.prod(mollified_delta(X - a, eps), axis=1)
        return total

    logger.info("Mollified estimate with eps %s and weights %s", tuple(epsilons), weights)
    return estimate_transform(TransformKind.s, combined, family, xi, N, seed, workers, config)


def wick_identity_check(
    xi: FunctionElement,
    zeta: FunctionElement,
    N: int,
    seed: int,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> tuple[OracleEstimate, complex]:
    """
    Sampler self-test: E[:exp <w, xi>: exp(i <w, zeta>)] = C(zeta) exp(i (xi, zeta)).

    Returns:
        tuple[OracleEstimate, complex]: estimate and the closed form
    """
    estimate = estimate_transform(
        TransformKind.s, lambda X: np.exp(1j * X[:, 0]), [zeta], xi, N, seed, workers, config
    )
    expected = characteristic_functional(zeta) * np.exp(1j * inner_product(xi, zeta))
    return estimate, complex(expected)


# ----------------------- Brownian paths
def iter_path_blocks(
    T: float,
    steps: int,
    N: int,
    seed: int,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> Iterator[PathBlock]:
    """Brownian paths on a uniform grid of `steps` intervals, in blocks of `path_block`."""
    if steps < 1:
        raise ValueError("steps must be at least 1")

    config = config or get_config()
    workers = workers or config.workers
    times = np.linspace(0.0, T, steps + 1)
    scale = math.sqrt(T / steps)
    sizes = _block_sizes(N, config.path_block)

    def draw(index: int) -> PathBlock:
        rng = probe_generator(seed, index, RandomStream.paths)
        values = np.zeros((sizes[index], steps + 1))
        values[:, 1:] = np.cumsum(scale * rng.standard_normal((sizes[index], steps)), axis=1)
        return PathBlock(index=index, times=times, values=values)

    logger.debug("Simulating %s paths with %s steps in %s blocks", N, steps, len(sizes))
    yield from _ordered_map(draw, len(sizes), workers)


def simulate_paths(
    T: float,
    steps: int,
    N: int,
    seed: int,
    workers: int | None = None,
    config: ToolkitConfig | None = None,
) -> Iterator[BrownianPath]:
    for block in iter_path_blocks(T, steps, N, seed, workers, config):
        for row in block.values:
            yield BrownianPath(times=block.times, values=row)
