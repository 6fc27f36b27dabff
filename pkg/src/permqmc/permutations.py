"""Permutations in one-line rank notation.

A permutation of d elements assigns rank ``ranks[i]`` (1-based, each of
``1..d`` exactly once) to element ``i``.  All text formats use comma-separated
1-based ranks, one permutation per line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Permutation",
    "identity",
    "inverse",
    "reverse",
    "n_discordant",
    "argsort",
    "random_permutation",
    "format_ranks",
    "parse_ranks",
]


@dataclass(frozen=True)
class Permutation:
    """Immutable permutation in one-line rank notation."""

    ranks: np.ndarray
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ranks = np.asarray(self.ranks, dtype=np.int64)
        if ranks.ndim != 1 or ranks.size < 2:
            raise ValueError("a permutation needs at least 2 elements")
        if not np.array_equal(np.sort(ranks), np.arange(1, ranks.size + 1)):
            raise ValueError(f"ranks must be a bijection on 1..{ranks.size}: {ranks}")
        ranks.flags.writeable = False
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "_key", tuple(int(r) for r in ranks))

    @property
    def d(self) -> int:
        return self.ranks.size

    def inverse(self) -> "Permutation":
        return inverse(self)

    def reverse(self) -> "Permutation":
        return reverse(self)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __str__(self) -> str:
        return format_ranks(self.ranks)


def identity(d: int) -> Permutation:
    """The permutation assigning rank i to element i."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return Permutation(np.arange(1, d + 1))


def inverse(p: Permutation) -> Permutation:
    """Permutation q with q(p(i)) = i for all elements i."""
    inv = np.empty(p.d, dtype=np.int64)
    inv[p.ranks - 1] = np.arange(1, p.d + 1)
    return Permutation(inv)


def reverse(p: Permutation) -> Permutation:
    """Flip every rank: element with rank r gets rank d+1-r."""
    return Permutation(p.d + 1 - p.ranks)


def n_discordant(p: Permutation, q: Permutation) -> int:
    """Number of element pairs ranked in opposite order by p and q.

    Symmetric in its arguments; 0 for identical permutations and
    ``d*(d-1)/2`` for a permutation and its reverse.  Runs in O(d log d)
    by counting inversions with a merge sort.
    """
    if p.d != q.d:
        raise ValueError(f"dimension mismatch: {p.d} != {q.d}")
    order = np.argsort(p.ranks, kind="stable")
    return _count_inversions(list(q.ranks[order]))


def _count_inversions(seq: list) -> int:
    n = len(seq)
    if n < 2:
        return 0
    mid = n // 2
    left, right = seq[:mid], seq[mid:]
    count = _count_inversions(left) + _count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            # right[j] jumps ahead of every remaining left element
            count += len(left) - i
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return count


def argsort(x: Sequence[float]) -> Permutation:
    """Sorting permutation b of x: x[b_1] <= x[b_2] <= ... (1-based indices).

    Ties are broken by ascending original index so results are reproducible.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("argsort input contains NaN")
    return Permutation(np.argsort(x, kind="stable") + 1)


def random_permutation(d: int, rng: np.random.Generator) -> Permutation:
    """Uniform draw from the d! permutations (Fisher-Yates shuffle)."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return Permutation(rng.permutation(d) + 1)


def format_ranks(ranks: np.ndarray) -> str:
    return ",".join(str(int(r)) for r in ranks)


def parse_ranks(line: str) -> np.ndarray:
    """Parse one comma-separated line of 1-based ranks (validated)."""
    try:
        values = np.array([int(tok) for tok in line.strip().split(",")], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"malformed permutation line: {line!r}") from exc
    return Permutation(values).ranks
