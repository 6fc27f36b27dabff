"""Shapley value estimators and exact oracles.

The permutation estimators walk each sampled permutation in rank order,
evaluating the characteristic function on the growing prefix coalition:
d+1 evaluations per permutation yield all d marginal contributions, and
every marginal difference counts once toward ``marginal_evals`` (the
budget axis shared by all methods).  ``v_evals`` counts characteristic
evaluations actually performed after subset caching.

Two independent exact oracles (subset enumeration with factorial weights,
and full permutation enumeration) are provided for small games.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.special import gammaln

from .discrepancy import WeightedSampleSet
from .games import Game

__all__ = [
    "ShapleyEstimate",
    "shapley_from_permutations",
    "exact_shapley_subsets",
    "exact_shapley_permutations",
    "owen_multilinear",
    "stratified_castro",
    "mse",
]

MAX_EXACT_SUBSET_D = 20
WARN_EXACT_SUBSET_D = 15
MAX_EXACT_PERMUTATION_D = 8


@dataclass
class ShapleyEstimate:
    """Per-player attributions plus the cost of producing them."""

    values: np.ndarray
    marginal_evals: int
    v_evals: int
    meta: dict = field(default_factory=dict)


class _CachedGame:
    """Per-run subset cache around a game, keyed by bitmask (frozenset past 64 players)."""

    def __init__(self, game: Game) -> None:
        self.game = game
        self.start_evals = game.eval_count
        self.cache: dict = {}
        self.use_mask = game.d <= 64

    def empty_key(self):
        return 0 if self.use_mask else frozenset()

    def add(self, key, player: int):
        return key | (1 << player) if self.use_mask else key | {player}

    def value(self, key, members: Iterable[int]) -> float:
        try:
            return self.cache[key]
        except KeyError:
            val = self.game.value(members)
            self.cache[key] = val
            return val

    def v_evals(self) -> int:
        return self.game.eval_count - self.start_evals


def shapley_from_permutations(game: Game, sample_set: WeightedSampleSet) -> ShapleyEstimate:
    """Weighted permutation estimate of all d Shapley values.

    For each sampled permutation, players join the coalition in rank order;
    each player's weighted marginal contribution accumulates into its
    attribution.  With uniform weights 1/n this is the plain Monte Carlo
    estimator, and the attributions sum exactly to
    ``sum(w) * (v(N) - v({}))`` by telescoping.
    """
    if game.d != sample_set.d:
        raise ValueError(f"dimension mismatch: game d={game.d}, samples d={sample_set.d}")
    cached = _CachedGame(game)
    values = np.zeros(game.d)
    members: list[int] = []
    for ranks, weight in zip(sample_set.ranks, sample_set.weights):
        join_order = np.argsort(ranks, kind="stable")
        key = cached.empty_key()
        members.clear()
        previous = cached.value(key, members)
        for player in map(int, join_order):
            key = cached.add(key, player)
            members.append(player)
            current = cached.value(key, members)
            values[player] += weight * (current - previous)
            previous = current
    return ShapleyEstimate(
        values=values,
        marginal_evals=sample_set.n * game.d,
        v_evals=cached.v_evals(),
        meta={"estimator": "permutation_walk", "sampler": sample_set.meta.algorithm,
              "seed": sample_set.meta.seed, "n": sample_set.n},
    )


def exact_shapley_subsets(game: Game) -> ShapleyEstimate:
    """Exact Shapley values by enumerating all 2^d coalitions.

    Uses the factorial-weighted sum over subsets, with weights computed via
    log-gamma so d up to the hard cap of 20 stays in range.
    """
    d = game.d
    if d > MAX_EXACT_SUBSET_D:
        raise ValueError(f"subset enumeration capped at d={MAX_EXACT_SUBSET_D}, got {d}")
    if d > WARN_EXACT_SUBSET_D:
        warnings.warn(
            f"exact subset enumeration at d={d} needs {1 << d} evaluations",
            RuntimeWarning,
            stacklevel=2,
        )
    n_subsets = 1 << d
    v = np.empty(n_subsets)
    for mask in range(n_subsets):
        v[mask] = game.value([i for i in range(d) if (mask >> i) & 1])
    masks = np.arange(n_subsets, dtype=np.int64)
    sizes = np.zeros(n_subsets, dtype=np.int64)
    for i in range(d):
        sizes += (masks >> i) & 1
    # |S|! (d-|S|-1)! / d! per subset size, in log space
    log_weight = gammaln(np.arange(d) + 1) + gammaln(d - np.arange(d)) - gammaln(d + 1)
    weight_by_size = np.exp(log_weight)
    values = np.zeros(d)
    for i in range(d):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        values[i] = np.sum(weight_by_size[sizes[without]] * (v[without | bit] - v[without]))
    return ShapleyEstimate(
        values=values,
        marginal_evals=d * (1 << (d - 1)),
        v_evals=n_subsets,
        meta={"estimator": "exact_subsets"},
    )


def exact_shapley_permutations(game: Game) -> ShapleyEstimate:
    """Exact Shapley values by averaging marginals over all d! join orders."""
    d = game.d
    if d > MAX_EXACT_PERMUTATION_D:
        raise ValueError(
            f"permutation enumeration capped at d={MAX_EXACT_PERMUTATION_D}, got {d}"
        )
    cached = _CachedGame(game)
    values = np.zeros(d)
    count = 0
    for join_order in itertools.permutations(range(d)):
        count += 1
        key = cached.empty_key()
        members: list[int] = []
        previous = cached.value(key, members)
        for player in join_order:
            key = cached.add(key, player)
            members.append(player)
            current = cached.value(key, members)
            values[player] += current - previous
            previous = current
    values /= count
    return ShapleyEstimate(
        values=values,
        marginal_evals=d * count,
        v_evals=cached.v_evals(),
        meta={"estimator": "exact_permutations"},
    )


def owen_multilinear(
    game: Game,
    nodes: int,
    draws_per_node: int,
    antithetic: bool = False,
    rng: np.random.Generator | None = None,
) -> ShapleyEstimate:
    """Multilinear-extension estimate via trapezoid quadrature over inclusion probability.

    Each player's value is the integral over q in [0, 1] of the expected
    marginal contribution against a random coalition that includes every
    other player independently with probability q.  The q axis is sampled
    at ``nodes + 1`` trapezoid points, each expectation with
    ``draws_per_node`` subset draws.  The antithetic variant integrates over
    [0, 1/2] only, pairing every drawn coalition with its complement to
    cover 1 - q.
    """
    if nodes < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got {nodes}")
    if draws_per_node < 1:
        raise ValueError(f"need at least 1 draw per node, got {draws_per_node}")
    rng = rng or np.random.default_rng()
    d = game.d
    cached = _CachedGame(game)
    span = 0.5 if antithetic else 1.0
    qs = np.linspace(0.0, span, nodes + 1)
    trap = np.full(nodes + 1, span / nodes)
    trap[0] = trap[-1] = span / (2 * nodes)
    values = np.zeros(d)
    marginal_evals = 0

    def subset_value(players: np.ndarray) -> float:
        key = cached.empty_key()
        for p in map(int, players):
            key = cached.add(key, p)
        return cached.value(key, players.tolist())

    all_players = np.arange(d)
    for i in range(d):
        others = np.delete(all_players, i)
        for q, tw in zip(qs, trap):
            acc = 0.0
            for _ in range(draws_per_node):
                coalition = others[rng.random(d - 1) < q]
                acc += subset_value(np.append(coalition, i)) - subset_value(coalition)
                marginal_evals += 1
                if antithetic:
                    complement = np.setdiff1d(others, coalition, assume_unique=True)
                    acc += subset_value(np.append(complement, i)) - subset_value(complement)
                    marginal_evals += 1
            values[i] += tw * acc / draws_per_node
    return ShapleyEstimate(
        values=values,
        marginal_evals=marginal_evals,
        v_evals=cached.v_evals(),
        meta={"estimator": "owen_halved" if antithetic else "owen",
              "nodes": nodes, "draws_per_node": draws_per_node},
    )


def stratified_castro(game: Game, n: int, rng: np.random.Generator | None = None) -> ShapleyEstimate:
    """Stratified permutation-position sampling.

    One stratum per (player, position) pair holds the marginal contributions
    of the player when it joins at that position; each stratum gets
    ``floor(n / d^2)`` uniform draws of the preceding coalition, and a
    player's estimate averages its d stratum means.  Requires a budget of
    at least 2*d^2 marginals.
    """
    d = game.d
    if n < 2 * d * d:
        raise ValueError(f"stratified sampling needs a budget of at least {2 * d * d}, got {n}")
    rng = rng or np.random.default_rng()
    draws = n // (d * d)
    cached = _CachedGame(game)
    values = np.zeros(d)
    marginal_evals = 0
    all_players = np.arange(d)

    def subset_value(players: np.ndarray) -> float:
        key = cached.empty_key()
        for p in map(int, players):
            key = cached.add(key, p)
        return cached.value(key, players.tolist())

    for i in range(d):
        others = np.delete(all_players, i)
        stratum_means = np.empty(d)
        for position in range(1, d + 1):
            acc = 0.0
            for _ in range(draws):
                coalition = rng.choice(others, size=position - 1, replace=False)
                acc += subset_value(np.append(coalition, i)) - subset_value(coalition)
                marginal_evals += 1
            stratum_means[position - 1] = acc / draws
        values[i] = stratum_means.mean()
    return ShapleyEstimate(
        values=values,
        marginal_evals=marginal_evals,
        v_evals=cached.v_evals(),
        meta={"estimator": "stratified", "draws_per_stratum": draws},
    )


def mse(reference: np.ndarray, estimate: np.ndarray) -> float:
    """Elementwise mean squared error between two equally-shaped matrices."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {estimate.shape}")
    return float(np.mean((reference - estimate) ** 2))
