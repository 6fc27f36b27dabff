import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from permqmc.attribution import ShapleyAttributor


def linear_predictor(weights):
    weights = np.asarray(weights)
    return lambda X: X @ weights


class TestEstimatorContract:
    def test_get_and_set_params(self):
        attributor = ShapleyAttributor(algorithm="herding", n_samples=7)
        params = attributor.get_params()
        assert params["algorithm"] == "herding" and params["n_samples"] == 7
        attributor.set_params(n_samples=3)
        assert attributor.n_samples == 3

    def test_clone(self):
        attributor = ShapleyAttributor(predictor=linear_predictor([1.0, 2.0]), lam=2.0)
        twin = clone(attributor)
        assert twin.lam == 2.0

    def test_transform_before_fit_fails(self):
        with pytest.raises(NotFittedError):
            ShapleyAttributor(predictor=linear_predictor([1.0, 2.0])).transform(
                np.zeros((1, 2))
            )

    def test_missing_predictor_rejected(self):
        attributor = ShapleyAttributor().fit(np.zeros((3, 2)))
        with pytest.raises(ValueError):
            attributor.transform(np.zeros((1, 2)))

    def test_feature_count_mismatch_rejected(self):
        attributor = ShapleyAttributor(predictor=linear_predictor([1.0, 2.0]))
        attributor.fit(np.zeros((3, 2)))
        with pytest.raises(ValueError):
            attributor.transform(np.zeros((1, 5)))


class TestAttributions:
    def test_linear_predictor_recovers_analytic_values(self, rng):
        weights = np.array([1.0, -2.0, 0.5, 3.0])
        background = rng.normal(size=(20, 4))
        rows = rng.normal(size=(3, 4))
        attributor = ShapleyAttributor(
            predictor=linear_predictor(weights), algorithm="antithetic", n_samples=8
        )
        attributions = attributor.fit(background).transform(rows)
        analytic = weights[None, :] * (rows - background.mean(axis=0)[None, :])
        np.testing.assert_allclose(attributions, analytic, atol=1e-10)

    def test_rows_sum_to_prediction_gap(self, rng):
        predictor = lambda X: np.cos(X).sum(axis=1)
        background = rng.normal(size=(15, 3))
        rows = rng.normal(size=(2, 3))
        attributor = ShapleyAttributor(predictor=predictor, algorithm="monte_carlo", n_samples=10)
        attributions = attributor.fit(background).transform(rows)
        for i, row in enumerate(rows):
            gap = predictor(row[None, :])[0] - predictor(background).mean()
            assert attributions[i].sum() == pytest.approx(gap, abs=1e-10)

    def test_deterministic_given_random_state(self, rng):
        predictor = lambda X: (X**2).sum(axis=1)
        background = rng.normal(size=(10, 3))
        rows = rng.normal(size=(2, 3))
        a = ShapleyAttributor(predictor=predictor, random_state=5).fit(background).transform(rows)
        b = ShapleyAttributor(predictor=predictor, random_state=5).fit(background).transform(rows)
        np.testing.assert_array_equal(a, b)

    def test_fit_transform_pipeline_compatible(self, rng):
        from sklearn.pipeline import Pipeline

        predictor = linear_predictor([2.0, 1.0])
        pipeline = Pipeline(
            [("shapley", ShapleyAttributor(predictor=predictor, n_samples=4))]
        )
        background = rng.normal(size=(8, 2))
        out = pipeline.fit(background).transform(background[:2])
        assert out.shape == (2, 2)
