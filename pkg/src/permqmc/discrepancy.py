"""Weighted permutation sample sets and their RKHS discrepancy.

The discrepancy of a weighted sample set measures, in the kernel's RKHS
norm, how far the weighted empirical measure is from the uniform
distribution on all d! permutations.  Small discrepancy bounds the
quadrature error of the weighted sample mean for any function in the RKHS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import NumericalError
from .kernels import KernelSpec, expected_kernel_uniform, gram
from .permutations import Permutation

__all__ = ["SampleMeta", "WeightedSampleSet", "discrepancy"]

# radicand below this is a genuine numerical failure rather than roundoff
CLAMP = -1e-10


@dataclass
class SampleMeta:
    """Provenance of a sample set: generator, seed, timing, cost counters."""

    algorithm: str = ""
    seed: int | None = None
    wall_time_s: float = 0.0
    counters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class WeightedSampleSet:
    """n permutations with per-sample weights.

    ``ranks`` holds the one-line rank vectors as an (n, d) integer matrix;
    uniform-weight sets carry weights all equal to 1/n, while optimised
    quadrature weights may be non-uniform and need not sum to one.
    """

    ranks: np.ndarray
    weights: np.ndarray
    meta: SampleMeta = field(default_factory=SampleMeta)

    def __post_init__(self) -> None:
        ranks = np.asarray(self.ranks, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if ranks.ndim != 2 or ranks.shape[0] == 0:
            raise ValueError("ranks must be a nonempty (n, d) matrix")
        if not (np.sort(ranks, axis=1) == np.arange(1, ranks.shape[1] + 1)).all():
            raise ValueError("every row must be a valid 1-based rank vector")
        if weights.shape != (ranks.shape[0],):
            raise ValueError("weights must be one scalar per sample")
        if not np.isfinite(weights).all():
            raise ValueError("weights must be finite")
        ranks.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, ranks: np.ndarray, meta: SampleMeta | None = None) -> "WeightedSampleSet":
        ranks = np.asarray(ranks)
        n = ranks.shape[0]
        return cls(ranks, np.full(n, 1.0 / n), meta or SampleMeta())

    @classmethod
    def from_permutations(
        cls,
        samples: Sequence[Permutation] | Iterable[Permutation],
        weights: Sequence[float] | None = None,
        meta: SampleMeta | None = None,
    ) -> "WeightedSampleSet":
        ranks = np.stack([p.ranks for p in samples])
        if weights is None:
            return cls.uniform(ranks, meta)
        return cls(ranks, np.asarray(weights, dtype=np.float64), meta or SampleMeta())

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def d(self) -> int:
        return self.ranks.shape[1]

    def permutations(self) -> Iterator[Permutation]:
        for row in self.ranks:
            yield Permutation(row.copy())


def discrepancy(sample_set: WeightedSampleSet, spec: KernelSpec) -> float:
    """RKHS distance of the weighted sample measure from uniform.

    Evaluates ``sqrt(c - 2*c*sum(w) + w' K w)`` where ``c`` is the closed-form
    uniform kernel expectation (equal for both the double expectation and the
    per-sample cross term, since the expectation does not depend on the fixed
    argument) and K is the sample Gram matrix.  Tiny negative radicands from
    cancellation are clamped to zero.
    """
    c = expected_kernel_uniform(spec, sample_set.d)
    w = sample_set.weights
    quad = float(w @ gram(spec, sample_set.ranks) @ w)
    radicand = c - 2.0 * c * float(w.sum()) + quad
    if radicand < CLAMP:
        raise NumericalError(
            f"discrepancy radicand {radicand:.3e} below clamp threshold {CLAMP:.0e}"
        )
    return math.sqrt(max(radicand, 0.0))
