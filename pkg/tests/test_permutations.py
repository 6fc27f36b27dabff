import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permqmc.permutations import (
    Permutation,
    argsort,
    format_ranks,
    identity,
    inverse,
    n_discordant,
    parse_ranks,
    random_permutation,
    reverse,
)

from conftest import all_permutations, naive_n_discordant

perm_strategy = st.integers(min_value=2, max_value=12).flatmap(
    lambda d: st.permutations(list(range(1, d + 1)))
)


class TestConstruction:
    def test_identity_d4(self):
        assert identity(4).ranks.tolist() == [1, 2, 3, 4]

    def test_identity_rejects_small_d(self):
        with pytest.raises(ValueError):
            identity(1)

    def test_rejects_duplicate_ranks(self):
        with pytest.raises(ValueError):
            Permutation(np.array([1, 1, 3]))

    def test_rejects_out_of_range_ranks(self):
        with pytest.raises(ValueError):
            Permutation(np.array([0, 1, 2]))

    def test_ranks_are_read_only(self):
        p = identity(4)
        with pytest.raises(ValueError):
            p.ranks[0] = 7

    def test_equality_and_hash(self):
        assert Permutation(np.array([2, 1, 3])) == Permutation(np.array([2, 1, 3]))
        assert len({identity(3), identity(3), reverse(identity(3))}) == 2


class TestInverse:
    def test_worked_example(self):
        # sigma = (1,4,2,3) has inverse (1,3,4,2)
        assert inverse(Permutation(np.array([1, 4, 2, 3]))).ranks.tolist() == [1, 3, 4, 2]

    def test_identity_is_self_inverse(self):
        assert inverse(identity(5)) == identity(5)

    def test_hand_derived(self):
        assert inverse(Permutation(np.array([2, 4, 1, 3]))).ranks.tolist() == [3, 1, 4, 2]

    @given(perm_strategy)
    def test_involution(self, ranks):
        p = Permutation(np.array(ranks))
        assert inverse(inverse(p)) == p

    def test_bijection_on_s4_through_s6(self):
        for d in (4, 5, 6):
            images = {inverse(p) for p in all_permutations(d)}
            assert len(images) == math.factorial(d)


class TestReverse:
    def test_identity(self):
        assert reverse(identity(4)).ranks.tolist() == [4, 3, 2, 1]

    def test_elementwise(self):
        assert reverse(Permutation(np.array([1, 4, 2, 3]))).ranks.tolist() == [4, 1, 3, 2]

    @given(perm_strategy)
    def test_involution(self, ranks):
        p = Permutation(np.array(ranks))
        assert reverse(reverse(p)) == p

    def test_reverse_attains_max_discordance_on_s4(self):
        for p in all_permutations(4):
            assert n_discordant(p, reverse(p)) == 6

    def test_bijection_on_s5(self):
        assert len({reverse(p) for p in all_permutations(5)}) == math.factorial(5)


class TestDiscordance:
    def test_worked_example(self):
        assert n_discordant(identity(4), Permutation(np.array([1, 4, 2, 3]))) == 2

    def test_self_discordance_zero(self):
        p = Permutation(np.array([3, 1, 4, 2, 5]))
        assert n_discordant(p, p) == 0

    def test_identity_vs_reverse_is_max(self):
        for d in (2, 5, 9):
            assert n_discordant(identity(d), reverse(identity(d))) == d * (d - 1) // 2

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            n_discordant(identity(3), identity(4))

    @given(perm_strategy, st.randoms(use_true_random=False))
    @settings(max_examples=60)
    def test_matches_naive_oracle(self, ranks, rand):
        p = Permutation(np.array(ranks))
        shuffled = list(ranks)
        rand.shuffle(shuffled)
        q = Permutation(np.array(shuffled))
        assert n_discordant(p, q) == naive_n_discordant(p, q)
        assert n_discordant(q, p) == n_discordant(p, q)

    def test_matches_naive_oracle_large_d(self, rng):
        for _ in range(20):
            d = int(rng.integers(20, 51))
            p = random_permutation(d, rng)
            q = random_permutation(d, rng)
            assert n_discordant(p, q) == naive_n_discordant(p, q)


class TestArgsort:
    def test_worked_example(self):
        b = argsort([0.1, -0.5, 0.4, 0.0])
        assert b.ranks.tolist() == [2, 4, 1, 3]

    def test_sorted_input_gives_identity(self):
        assert argsort([1.0, 2.0, 3.0]) == identity(3)

    def test_all_equal_gives_identity(self):
        assert argsort([7.0] * 5) == identity(5)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            argsort([0.0, float("nan"), 1.0])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=30))
    def test_composition_is_sorted(self, values):
        x = np.array(values)
        b = argsort(x)
        assert (np.diff(x[b.ranks - 1]) >= 0).all()


class TestRandomPermutation:
    def test_deterministic_given_seed(self):
        a = random_permutation(8, np.random.default_rng(7))
        b = random_permutation(8, np.random.default_rng(7))
        assert a == b

    def test_d2_frequencies(self):
        rng = np.random.default_rng(0)
        hits = sum(random_permutation(2, rng).ranks[0] == 1 for _ in range(10_000))
        assert abs(hits / 10_000 - 0.5) < 0.02

    def test_d4_chi_square(self):
        from scipy.stats import chisquare

        rng = np.random.default_rng(1)
        counts: dict = {}
        for _ in range(24_000):
            key = tuple(random_permutation(4, rng).ranks)
            counts[key] = counts.get(key, 0) + 1
        observed = np.array(list(counts.values()))
        assert len(observed) == 24
        stat = chisquare(observed).statistic
        from scipy.stats import chi2

        assert stat < chi2.ppf(0.999, 23)

    def test_rejects_small_d(self):
        with pytest.raises(ValueError):
            random_permutation(1, np.random.default_rng(0))


class TestTextFormat:
    def test_round_trip(self):
        p = Permutation(np.array([3, 1, 2]))
        assert parse_ranks(format_ranks(p.ranks)).tolist() == [3, 1, 2]

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_ranks("1,two,3")

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            parse_ranks("1,1,2")
