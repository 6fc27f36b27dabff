import itertools

import numpy as np
import pytest

from permqmc.permutations import Permutation


def naive_n_discordant(p: Permutation, q: Permutation) -> int:
    """O(d^2) double-loop discordant pair count, the independent oracle."""
    count = 0
    a, b = p.ranks, q.ranks
    for i in range(p.d):
        for j in range(i + 1, p.d):
            if (a[i] - a[j]) * (b[i] - b[j]) < 0:
                count += 1
    return count


def all_permutations(d: int):
    """Every element of the symmetric group as a Permutation, in lex order."""
    for ranks in itertools.permutations(range(1, d + 1)):
        yield Permutation(np.array(ranks))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
