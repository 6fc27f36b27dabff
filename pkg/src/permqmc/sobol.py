"""Sobol low-discrepancy sequence with optional digital-shift randomisation.

Direction numbers come from the packaged Joe & Kuo primitive-polynomial
table (``data/sobol_direction_numbers.txt``; format documented in the file
header), which supports sequence dimensions up to 520.  Points are produced
in Gray-code order with 30-bit precision.  Randomisation XORs a fixed
per-dimension bit pattern onto every point, which preserves the dyadic
equidistribution structure of the sequence.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

import numpy as np

__all__ = ["SobolSequence", "max_dimension"]

MAXBIT = 30
_SCALE = float(2**MAXBIT)


@lru_cache(maxsize=1)
def _initialisation_table() -> list[tuple[int, int, list[int]]]:
    """Parsed (degree, coefficients, initial m values) per dimension >= 2."""
    rows = []
    text = resources.files("permqmc.data").joinpath("sobol_direction_numbers.txt").read_text()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [int(tok) for tok in line.split()]
        _, degree, coeffs = fields[0], fields[1], fields[2]
        rows.append((degree, coeffs, fields[3 : 3 + degree]))
    return rows


def max_dimension() -> int:
    return len(_initialisation_table()) + 1


def _direction_integers(dimension: int) -> np.ndarray:
    """(dimension, MAXBIT) matrix of direction integers V[j, k] = m_k << (MAXBIT-k)."""
    table = _initialisation_table()
    if dimension > len(table) + 1:
        raise ValueError(
            f"sequence dimension {dimension} exceeds direction-number table "
            f"(max {len(table) + 1})"
        )
    v = np.zeros((dimension, MAXBIT), dtype=np.int64)
    v[0] = 1 << (MAXBIT - np.arange(1, MAXBIT + 1))
    for dim in range(2, dimension + 1):
        degree, coeffs, m_init = table[dim - 2]
        m = list(m_init)
        for k in range(degree, MAXBIT):
            # primitive-polynomial recurrence over GF(2)
            new = m[k - degree] ^ (m[k - degree] << degree)
            for i in range(1, degree):
                if (coeffs >> (degree - 1 - i)) & 1:
                    new ^= m[k - i] << i
            m.append(new)
        v[dim - 1] = [m[k] << (MAXBIT - k - 1) for k in range(MAXBIT)]
    return v


class SobolSequence:
    """Stateful generator over [0, 1)^dimension.

    ``shift`` is one MAXBIT-bit integer per dimension XOR-ed onto the raw
    point integers; zero (the default) gives the plain sequence.  The point
    counter starts at ``start_index``, which defaults to 1 so the all-zeros
    point at index 0 is skipped: it would degenerate downstream (for the
    sphere map it produces all-tied coordinates).
    """

    def __init__(
        self,
        dimension: int,
        shift: np.ndarray | None = None,
        start_index: int = 1,
    ) -> None:
        if dimension < 1:
            raise ValueError(f"sequence dimension must be >= 1, got {dimension}")
        if start_index < 0:
            raise ValueError(f"start index must be >= 0, got {start_index}")
        self.dimension = dimension
        self._v = _direction_integers(dimension)
        if shift is None:
            shift = np.zeros(dimension, dtype=np.int64)
        self.shift = np.asarray(shift, dtype=np.int64) & (2**MAXBIT - 1)
        if self.shift.shape != (dimension,):
            raise ValueError("shift must hold one bit pattern per dimension")
        self.index = 0
        self._state = np.zeros(dimension, dtype=np.int64)
        while self.index < start_index:
            self._advance()

    @classmethod
    def randomised(
        cls, dimension: int, rng: np.random.Generator, start_index: int = 1
    ) -> "SobolSequence":
        """Sequence with a uniform random digital shift drawn from ``rng``."""
        shift = rng.integers(0, 2**MAXBIT, size=dimension, dtype=np.int64)
        return cls(dimension, shift=shift, start_index=start_index)

    def _advance(self) -> None:
        # Gray-code stepping: flip the direction integer of the lowest zero bit
        low = self.index
        bit = 0
        while low & 1:
            low >>= 1
            bit += 1
        self._state ^= self._v[:, bit]
        self.index += 1

    def next_point(self) -> np.ndarray:
        """The point at the current index; advances the counter."""
        point = (self._state ^ self.shift) / _SCALE
        self._advance()
        return point

    def take(self, n: int) -> np.ndarray:
        """The next n points as an (n, dimension) matrix."""
        out = np.empty((n, self.dimension))
        for i in range(n):
            out[i] = self.next_point()
        return out
