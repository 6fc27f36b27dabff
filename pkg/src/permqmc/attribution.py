"""Scikit-learn style interface for per-row feature attributions.

``ShapleyAttributor`` composes a predictor, a background data set and a
permutation sampler into a transformer: ``fit`` stores the background
instances used to marginalise out-of-coalition features, and ``transform``
returns one row of Shapley attributions per input row.  It follows the
scikit-learn estimator contract (``get_params`` / ``set_params`` / clone),
so it drops into pipelines and parameter searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .harness import estimate_once
from .games import marginalization_game
from .kernels import KernelSpec

__all__ = ["ShapleyAttributor"]


class ShapleyAttributor(BaseEstimator, TransformerMixin):
    """Per-row Shapley attributions of a predictor against a background set.

    Parameters
    ----------
    predictor : callable
        Maps an (m, d) array of rows to m predictions.
    algorithm : str
        Sampler or estimator name: any permutation sampler (``monte_carlo``,
        ``antithetic``, ``herding``, ``sbq``, ``orthogonal``, ``sobol``,
        ``sphere_mc``) or ``owen``, ``owen_halved``, ``stratified``,
        ``exact``.
    n_samples : int
        Permutation count per explained row (sampler algorithms).
    kernel, lam : str, float
        Kernel used by the greedy sampler algorithms.
    pool_size : int
        Candidate pool for the greedy argmax approximation.
    random_state : int
        Base seed; row i of a transform uses ``random_state + i``.
    """

    def __init__(
        self,
        predictor=None,
        algorithm: str = "antithetic",
        n_samples: int = 100,
        kernel: str = "mallows",
        lam: float = 4.0,
        pool_size: int = 25,
        random_state: int = 0,
    ) -> None:
        self.predictor = predictor
        self.algorithm = algorithm
        self.n_samples = n_samples
        self.kernel = kernel
        self.lam = lam
        self.pool_size = pool_size
        self.random_state = random_state

    def fit(self, X, y=None) -> "ShapleyAttributor":
        """Store the background instances used for marginalisation."""
        X = check_array(X, dtype=np.float64, ensure_min_features=2)
        self.background_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        """Shapley attribution matrix, one row per input instance."""
        check_is_fitted(self, "background_")
        if self.predictor is None:
            raise ValueError("ShapleyAttributor needs a predictor callable")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, background has {self.n_features_in_}"
            )
        spec = KernelSpec(kind=self.kernel, lam=self.lam)
        out = np.empty_like(X)
        for i, row in enumerate(X):
            game = marginalization_game(self.predictor, row, self.background_)
            estimate = estimate_once(
                game,
                self.algorithm,
                self.random_state + i,
                n=self.n_samples,
                kernel=spec,
                pool_size=self.pool_size,
            )
            out[i] = estimate.values
        return out
