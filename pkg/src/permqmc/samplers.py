"""Permutation sample generators.

Every sampler takes a :class:`SamplerConfig` and returns a
:class:`~permqmc.discrepancy.WeightedSampleSet`.  Generators fall into three
families:

* plain Monte Carlo and its antithetic (reversed-pair) variant;
* kernel-based greedy selection: ``kernel_herding`` picks each sample to
  minimise total similarity to the already-selected set, and ``sbq``
  additionally optimises quadrature weights by minimising the posterior
  variance of a Gaussian-process model of the integrand;
* sphere-based maps: well-spread points on the unit sphere in R^(d-1)
  (a random orthonormal basis with its antipodes, or a randomised Sobol
  sequence pushed through the polar inverse-CDF transform) are snapped to
  their nearest permutations.

All generators are deterministic given their seed.  Wall time is measured
around sample generation only and recorded in the returned set's metadata.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from .discrepancy import SampleMeta, WeightedSampleSet
from .errors import NumericalError
from .kernels import KernelSpec, expected_kernel_uniform, kernel_from_signs, pair_signs
from .sobol import SobolSequence
from .sphere import (
    inverse_cdf_batch,
    lift_rows,
    polar_to_cartesian_batch,
    projection_matrix,
    rank_rows,
)

__all__ = [
    "SamplerConfig",
    "monte_carlo",
    "antithetic",
    "kernel_herding",
    "sbq",
    "orthogonal_codes",
    "sobol_permutations",
    "sphere_mc",
    "get_sampler",
    "SAMPLERS",
]

# redraws allowed before accepting a candidate that duplicates a selected one
MAX_REDRAWS = 100
SBQ_NUGGET = 1e-10


MAX_EXHAUSTIVE_POOL_D = 6


@dataclass(frozen=True)
class SamplerConfig:
    """Shared sampler settings.

    ``kernel`` and ``pool_size`` only affect the greedy kernel methods;
    ``pool_size=None`` selects the exhaustive argmax over all d!
    permutations (a test mode, d <= 6 only).  ``sobol_shift`` (one bit
    pattern per sequence dimension) only affects ``sobol_permutations``
    and is derived from ``seed`` when absent.
    """

    n: int
    d: int
    kernel: KernelSpec = field(default_factory=KernelSpec)
    pool_size: int | None = 25
    seed: int | None = None
    sobol_shift: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"sample count must be >= 1, got {self.n}")
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if self.pool_size is None:
            if self.d > MAX_EXHAUSTIVE_POOL_D:
                raise ValueError(
                    f"exhaustive argmax pools are limited to d <= {MAX_EXHAUSTIVE_POOL_D}"
                )
        elif self.pool_size < 1:
            raise ValueError(f"pool size must be >= 1, got {self.pool_size}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _finish(cfg: SamplerConfig, algorithm: str, ranks: np.ndarray,
            started: float, weights: np.ndarray | None = None,
            counters: dict | None = None) -> WeightedSampleSet:
    meta = SampleMeta(
        algorithm=algorithm,
        seed=cfg.seed,
        wall_time_s=time.perf_counter() - started,
        counters=counters or {},
    )
    if weights is None:
        return WeightedSampleSet.uniform(ranks, meta)
    return WeightedSampleSet(ranks, weights, meta)


def monte_carlo(cfg: SamplerConfig) -> WeightedSampleSet:
    """n independent uniform permutations with weights 1/n."""
    started = time.perf_counter()
    rng = cfg.rng()
    ranks = np.stack([rng.permutation(cfg.d) + 1 for _ in range(cfg.n)])
    return _finish(cfg, "monte_carlo", ranks, started)


def antithetic(cfg: SamplerConfig) -> WeightedSampleSet:
    """n/2 uniform permutations, each followed by its reverse; n must be even."""
    if cfg.n % 2:
        raise ValueError(f"antithetic sampling needs an even sample count, got {cfg.n}")
    started = time.perf_counter()
    rng = cfg.rng()
    ranks = np.empty((cfg.n, cfg.d), dtype=np.int64)
    for i in range(cfg.n // 2):
        ranks[2 * i] = rng.permutation(cfg.d) + 1
        ranks[2 * i + 1] = cfg.d + 1 - ranks[2 * i]
    return _finish(cfg, "antithetic", ranks, started)


def _draw_pool(rng: np.random.Generator, cfg: SamplerConfig,
               chosen: set[tuple]) -> np.ndarray:
    """Candidate pool for one greedy step.

    With a finite pool size, draws i.i.d. uniform permutations, redrawing
    duplicates of already-selected samples; after MAX_REDRAWS failed redraws
    a duplicate is accepted (for tiny d the pool would otherwise never fill
    once most permutations are selected).  With ``pool_size=None`` the pool
    is the whole symmetric group, making the argmax exact.
    """
    if cfg.pool_size is None:
        return np.array(list(itertools.permutations(range(1, cfg.d + 1))), dtype=np.int64)
    pool = np.empty((cfg.pool_size, cfg.d), dtype=np.int64)
    for i in range(cfg.pool_size):
        for _ in range(MAX_REDRAWS + 1):
            candidate = rng.permutation(cfg.d) + 1
            if tuple(candidate) not in chosen:
                break
        pool[i] = candidate
    return pool


def kernel_herding(cfg: SamplerConfig) -> WeightedSampleSet:
    """Greedy selection maximising spread under the configured kernel.

    Step n+1 evaluates, over a fresh pool of ``pool_size`` uniform candidates,
    the objective E[K] - (1/(n+1)) * sum of kernel values against the selected
    set, and keeps the argmax.  Since the uniform expectation E[K] is constant
    this picks the candidate least similar to what was already chosen.
    Weights are uniform 1/n.
    """
    started = time.perf_counter()
    rng = cfg.rng()
    expected = expected_kernel_uniform(cfg.kernel, cfg.d)
    n_pairs = cfg.d * (cfg.d - 1) // 2
    ranks = np.empty((cfg.n, cfg.d), dtype=np.int64)
    signs = np.empty((cfg.n, n_pairs))
    chosen: set[tuple] = set()
    kernel_evals = 0
    for m in range(cfg.n):
        pool = _draw_pool(rng, cfg, chosen)
        pool_signs = pair_signs(pool)
        if m == 0:
            objective = np.full(len(pool), expected)
        else:
            similarity = kernel_from_signs(cfg.kernel, pool_signs, signs[:m]).sum(axis=1)
            objective = expected - similarity / (m + 1)
            kernel_evals += len(pool) * m
        best = int(np.argmax(objective))
        ranks[m] = pool[best]
        signs[m] = pool_signs[best]
        chosen.add(tuple(pool[best]))
    return _finish(cfg, "herding", ranks, started,
                   counters={"kernel_evals": kernel_evals})


def sbq(cfg: SamplerConfig) -> WeightedSampleSet:
    """Sequential Bayesian quadrature: greedy samples plus optimised weights.

    Each step picks, over a fresh candidate pool, the permutation minimising
    the Gaussian-process posterior variance of the uniform-average estimate;
    the Cholesky factor of the kernel matrix is extended one row per step.
    Returns weights solving K w = z, where every entry of z is the closed-form
    uniform kernel expectation.  Weights may be non-uniform and do not in
    general sum to one (with the Kendall kernel z = 0, so all weights
    degenerate to zero).

    On a Cholesky breakdown (duplicate or near-duplicate sample), a diagonal
    nugget of 1e-10 is added and the factorisation retried once; a second
    failure raises :class:`NumericalError`.
    """
    started = time.perf_counter()
    rng = cfg.rng()
    expected = expected_kernel_uniform(cfg.kernel, cfg.d)
    diag = 1.0 if cfg.kernel.kind != "spearman" else cfg.d * (cfg.d + 1) * (2 * cfg.d + 1) / 6.0
    n_pairs = cfg.d * (cfg.d - 1) // 2
    n = cfg.n
    ranks = np.empty((n, cfg.d), dtype=np.int64)
    signs = np.empty((n, n_pairs))
    chol = np.zeros((n, n))
    chosen: set[tuple] = set()
    nugget = 0.0
    kernel_evals = 0

    def extend_factor(m: int, cross: np.ndarray, best: int) -> None:
        nonlocal nugget
        row = solve_triangular(chol[:m, :m], cross[best], lower=True) if m else np.zeros(0)
        schur = diag + nugget - float(row @ row)
        if schur <= 0.0:
            if nugget > 0.0:
                raise NumericalError("kernel matrix not positive definite despite nugget")
            nugget = SBQ_NUGGET
            _refactor(m)
            extend_factor(m, cross, best)
            return
        chol[m, :m] = row
        chol[m, m] = math.sqrt(schur)

    def _refactor(m: int) -> None:
        gram = kernel_from_signs(cfg.kernel, signs[:m], signs[:m])
        chol[:m, :m] = np.linalg.cholesky(gram + nugget * np.eye(m))

    for m in range(n):
        pool = _draw_pool(rng, cfg, chosen)
        pool_signs = pair_signs(pool)
        if m == 0:
            # the posterior variance is identical for every single candidate
            best = 0
            cross = np.zeros((len(pool), 0))
        else:
            cross = kernel_from_signs(cfg.kernel, pool_signs, signs[:m])
            kernel_evals += len(pool) * m
            solved = solve_triangular(chol[:m, :m], cross.T, lower=True)  # (m, pool)
            ones_solved = solve_triangular(chol[:m, :m], np.ones(m), lower=True)
            schur = diag + nugget - np.einsum("ij,ij->j", solved, solved)
            valid = schur > 1e-14
            # variance reduction of each candidate, up to shared constants:
            # z is a constant vector, so minimising the posterior variance
            # means maximising (1 - a'u)^2 / schur
            gain = np.where(
                valid,
                (1.0 - solved.T @ ones_solved) ** 2 / np.where(valid, schur, 1.0),
                -np.inf,
            )
            best = int(np.argmax(gain))
        ranks[m] = pool[best]
        signs[m] = pool_signs[best]
        chosen.add(tuple(pool[best]))
        extend_factor(m, cross, best)

    z = np.full(n, expected)
    half = solve_triangular(chol, z, lower=True)
    weights = solve_triangular(chol.T, half, lower=False)
    return _finish(cfg, "sbq", ranks, started, weights=weights,
                   counters={"kernel_evals": kernel_evals, "nugget": nugget})


def orthogonal_codes(cfg: SamplerConfig) -> WeightedSampleSet:
    """Blocks of 2(d-1) permutations from random orthonormal bases.

    Each block draws a Haar-random orthonormal basis of R^(d-1) (Gram-Schmidt
    on an i.i.d. Gaussian matrix, orthogonalised twice per vector for
    numerical accuracy), lifts every basis vector and its antipode to the
    rank-vector hyperplane and snaps to permutations.  Antipodes follow their
    vector immediately, so even-indexed samples are paired with their reverse.
    A trailing partial block is truncated to reach exactly n samples.
    """
    if cfg.d < 3:
        raise ValueError(f"orthogonal codes need d >= 3, got {cfg.d}")
    started = time.perf_counter()
    rng = cfg.rng()
    basis = projection_matrix(cfg.d)
    block = 2 * (cfg.d - 1)
    n_blocks = -(-cfg.n // block)
    rows = np.empty((n_blocks * block, cfg.d - 1))
    for b in range(n_blocks):
        q = _haar_basis(rng, cfg.d - 1)
        rows[b * block : (b + 1) * block : 2] = q
        rows[b * block + 1 : (b + 1) * block : 2] = -q
    ranks = rank_rows(lift_rows(rows[: cfg.n], basis))
    return _finish(cfg, "orthogonal", ranks, started,
                   counters={"blocks": n_blocks, "block_size": block})


def _haar_basis(rng: np.random.Generator, m: int) -> np.ndarray:
    """Haar-distributed orthonormal basis: Gram-Schmidt on Gaussian rows."""
    g = rng.standard_normal((m, m))
    q = np.empty_like(g)
    for i in range(m):
        v = g[i]
        for _ in range(2):  # second pass keeps orthogonality near 1e-12
            v = v - (q[:i] @ v) @ q[:i]
        q[i] = v / np.linalg.norm(v)
    return q


def sobol_permutations(cfg: SamplerConfig) -> WeightedSampleSet:
    """Permutations from a digitally-shifted Sobol sequence on the sphere.

    Each Sobol point in [0,1)^(d-2) becomes polar angles through the
    per-axis inverse CDF, then a Cartesian point of the unit sphere in
    R^(d-1), and finally a permutation via the hyperplane lift and ranking.
    The index-0 (all zeros) Sobol point is skipped.  The digital shift is
    taken from the config, or derived from the seed when absent.
    """
    if cfg.d < 4:
        raise ValueError(f"sobol permutations need d >= 4, got {cfg.d}")
    started = time.perf_counter()
    if cfg.sobol_shift is not None:
        seq = SobolSequence(cfg.d - 2, shift=np.asarray(cfg.sobol_shift, dtype=np.int64))
    else:
        seq = SobolSequence.randomised(cfg.d - 2, cfg.rng())
    cube = seq.take(cfg.n)
    angles = np.empty_like(cube)
    for j in range(1, cfg.d - 1):
        angles[:, j - 1] = inverse_cdf_batch(j, cube[:, j - 1], cfg.d)
    points = polar_to_cartesian_batch(angles)
    ranks = rank_rows(lift_rows(points, projection_matrix(cfg.d)))
    return _finish(cfg, "sobol", ranks, started,
                   counters={"sobol_index": seq.index})


def sphere_mc(cfg: SamplerConfig) -> WeightedSampleSet:
    """Uniform sphere points mapped to permutations; distributed like plain MC."""
    if cfg.d < 3:
        raise ValueError(f"sphere sampling needs d >= 3, got {cfg.d}")
    started = time.perf_counter()
    rng = cfg.rng()
    points = rng.standard_normal((cfg.n, cfg.d - 1))
    norms = np.linalg.norm(points, axis=1)
    while (bad := norms <= 1e-12).any():
        points[bad] = rng.standard_normal((int(bad.sum()), cfg.d - 1))
        norms = np.linalg.norm(points, axis=1)
    points /= norms[:, None]
    ranks = rank_rows(lift_rows(points, projection_matrix(cfg.d)))
    return _finish(cfg, "sphere_mc", ranks, started)


SAMPLERS: dict[str, Callable[[SamplerConfig], WeightedSampleSet]] = {
    "monte_carlo": monte_carlo,
    "antithetic": antithetic,
    "herding": kernel_herding,
    "sbq": sbq,
    "orthogonal": orthogonal_codes,
    "sobol": sobol_permutations,
    "sphere_mc": sphere_mc,
}


def get_sampler(name: str) -> Callable[[SamplerConfig], WeightedSampleSet]:
    try:
        return SAMPLERS[name]
    except KeyError:
        raise ValueError(f"unknown sampler {name!r}, expected one of {sorted(SAMPLERS)}") from None
