import itertools
import math

import numpy as np
import pytest
from scipy.special import betainc
from scipy.stats import chi2, chisquare, qmc

from permqmc.permutations import identity, reverse
from permqmc.sobol import MAXBIT, SobolSequence, max_dimension
from permqmc.sphere import (
    inverse_cdf_batch,
    lift_to_hyperplane,
    nearest_permutation,
    polar_inverse_cdf,
    polar_to_cartesian,
    polar_to_cartesian_batch,
    projection_matrix,
    rank_rows,
    uniform_sphere_point,
)


class TestProjectionMatrix:
    def test_d3_rows(self):
        u = projection_matrix(3)
        np.testing.assert_allclose(u[0], np.array([1, -1, 0]) / math.sqrt(2))
        np.testing.assert_allclose(u[1], np.array([1, 1, -2]) / math.sqrt(6))

    def test_rows_orthonormal(self):
        for d in (3, 5, 12, 40):
            u = projection_matrix(d)
            np.testing.assert_allclose(u @ u.T, np.eye(d - 1), atol=1e-12)

    def test_rows_orthogonal_to_ones(self):
        for d in (3, 7, 25):
            u = projection_matrix(d)
            normal = np.full(d, 1 / math.sqrt(d))
            np.testing.assert_allclose(u @ normal, 0.0, atol=1e-12)

    def test_gram_structure(self):
        # U^T U has diagonal (d-1)/d and off-diagonal -1/d
        d = 6
        g = projection_matrix(d).T @ projection_matrix(d)
        expected = -np.full((d, d), 1 / d) + np.eye(d)
        np.testing.assert_allclose(g, expected, atol=1e-12)

    def test_rejects_small_d(self):
        with pytest.raises(ValueError):
            projection_matrix(2)


class TestUniformSpherePoint:
    def test_unit_norm(self, rng):
        for _ in range(50):
            x = uniform_sphere_point(6, rng)
            assert abs(np.linalg.norm(x) - 1.0) < 1e-12

    def test_mean_is_near_zero(self):
        rng = np.random.default_rng(3)
        points = np.stack([uniform_sphere_point(5, rng) for _ in range(100_000)])
        assert np.abs(points.mean(axis=0)).max() < 0.02

    def test_rejects_small_d(self, rng):
        with pytest.raises(ValueError):
            uniform_sphere_point(2, rng)


class TestLift:
    def test_coordinates_sum_to_zero(self, rng):
        u = projection_matrix(7)
        for _ in range(20):
            lifted = lift_to_hyperplane(uniform_sphere_point(7, rng), u)
            assert abs(lifted.sum()) < 1e-10

    def test_norm_preserved(self, rng):
        u = projection_matrix(9)
        x = uniform_sphere_point(9, rng)
        assert abs(np.linalg.norm(lift_to_hyperplane(x, u)) - 1.0) < 1e-12

    def test_d3_basis_vector(self):
        lifted = lift_to_hyperplane(np.array([1.0, 0.0]), projection_matrix(3))
        np.testing.assert_allclose(lifted, np.array([1, -1, 0]) / math.sqrt(2), atol=1e-15)


class TestNearestPermutation:
    def test_matches_bruteforce_inner_product_argmax(self, rng):
        # oracle: maximise the inner product over all d! rank vectors
        for d in (3, 4, 5):
            u = projection_matrix(d)
            vertices = np.array(list(itertools.permutations(range(1, d + 1))))
            for _ in range(40):
                lifted = lift_to_hyperplane(uniform_sphere_point(d, rng), u)
                winner = vertices[np.argmax(vertices @ lifted)]
                assert nearest_permutation(lifted).ranks.tolist() == winner.tolist()

    def test_ascending_coordinates_give_identity(self):
        assert nearest_permutation(np.array([-1.0, 0.0, 0.5, 2.0])) == identity(4)

    def test_antipode_is_reverse(self, rng):
        u = projection_matrix(6)
        for _ in range(25):
            lifted = lift_to_hyperplane(uniform_sphere_point(6, rng), u)
            assert nearest_permutation(-lifted) == reverse(nearest_permutation(lifted))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            nearest_permutation(np.array([0.0, float("nan")]))

    def test_rank_rows_matches_single(self, rng):
        rows = rng.normal(size=(10, 5))
        batch = rank_rows(rows)
        for i in range(10):
            assert batch[i].tolist() == nearest_permutation(rows[i]).ranks.tolist()


class TestPermutohedronVertices:
    def test_vertex_sums_exhaustive(self):
        for d in (3, 4, 5, 6):
            for vertex in itertools.permutations(range(1, d + 1)):
                v = np.array(vertex)
                assert v.sum() == d * (d + 1) // 2
                assert (v**2).sum() == d * (d + 1) * (2 * d + 1) // 6


class TestPolarInverseCdf:
    def test_symmetry_at_half(self):
        for d, j in ((5, 1), (10, 4), (9, 2)):
            assert polar_inverse_cdf(j, 0.5, d) == pytest.approx(math.pi / 2, abs=1e-9)

    def test_final_axis_is_uniform_angle(self):
        assert polar_inverse_cdf(3, 0.25, 5) == pytest.approx(math.pi / 2)
        assert polar_inverse_cdf(8, 0.0, 10) == 0.0

    def test_closed_form_case_d4(self):
        # axis 1 at d=4 has density sin(phi)/2, so CDF (1-cos(phi))/2
        assert polar_inverse_cdf(1, 0.75, 4) == pytest.approx(2 * math.pi / 3, abs=1e-9)

    def test_residual_against_incomplete_beta_oracle(self, rng):
        for d, j in ((5, 1), (10, 3), (40, 5), (256, 1)):
            k = d - j - 2
            u = rng.uniform(0, 1, 300)
            phi = inverse_cdf_batch(j, u, d)
            s2 = np.sin(np.minimum(phi, math.pi - phi)) ** 2
            cdf = 0.5 * betainc((k + 1) / 2, 0.5, s2)
            cdf = np.where(phi <= math.pi / 2, cdf, 1 - cdf)
            assert np.abs(cdf - u).max() <= 1e-10

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            polar_inverse_cdf(1, 1.0, 5)
        with pytest.raises(ValueError):
            polar_inverse_cdf(0, 0.5, 5)
        with pytest.raises(ValueError):
            polar_inverse_cdf(4, 0.5, 5)


class TestPolarToCartesian:
    def test_d4_worked_example(self):
        np.testing.assert_allclose(
            polar_to_cartesian(np.array([math.pi / 2, 0. ])), [0.0, 1.0, 0.0], atol=1e-15
        )

    def test_unit_norm(self, rng):
        for _ in range(30):
            n_angles = int(rng.integers(1, 9))
            angles = np.append(rng.uniform(0, math.pi, n_angles - 1), rng.uniform(0, 2 * math.pi))
            assert abs(np.linalg.norm(polar_to_cartesian(angles)) - 1.0) < 1e-12

    def test_inverse_cdf_composition_covers_sphere_uniformly(self):
        # random uniform inputs through the polar transform: octant counts
        # at d=4 should be flat
        rng = np.random.default_rng(11)
        u = rng.uniform(0, 1, size=(24_000, 2))
        angles = np.column_stack(
            [inverse_cdf_batch(1, u[:, 0], 4), 2 * math.pi * u[:, 1]]
        )
        points = polar_to_cartesian_batch(angles)
        octant = (points[:, 0] > 0) * 4 + (points[:, 1] > 0) * 2 + (points[:, 2] > 0)
        counts = np.bincount(octant, minlength=8)
        assert chisquare(counts).statistic < chi2.ppf(0.999, 7)


class TestSobolSequence:
    def test_first_point_after_skip_is_center(self):
        for dim in (1, 2, 7):
            np.testing.assert_array_equal(SobolSequence(dim).next_point(), np.full(dim, 0.5))

    def test_deterministic_given_shift_and_index(self):
        shift = np.arange(1, 4, dtype=np.int64) * 12345
        a = SobolSequence(3, shift=shift).take(20)
        b = SobolSequence(3, shift=shift).take(20)
        np.testing.assert_array_equal(a, b)

    def test_matches_reference_generator(self):
        # cross-check against an independent implementation of the same
        # direction numbers (unscrambled)
        for dim in (1, 2, 5, 50, 254):
            mine = SobolSequence(dim, start_index=0).take(128)
            ref = qmc.Sobol(dim, scramble=False).random(128)
            np.testing.assert_array_equal(mine, ref)

    def test_shifted_projections_equidistributed(self, rng):
        shift = rng.integers(0, 2**MAXBIT, size=3, dtype=np.int64)
        points = SobolSequence(3, shift=shift, start_index=0).take(256)
        for col in range(3):
            counts, _ = np.histogram(points[:, col], bins=np.linspace(0, 1, 257))
            assert (counts == 1).all()

    def test_dimension_bounds(self):
        assert max_dimension() >= 256 + 2
        with pytest.raises(ValueError):
            SobolSequence(max_dimension() + 1)
        with pytest.raises(ValueError):
            SobolSequence(0)

    def test_start_index(self):
        raw = SobolSequence(2, start_index=0)
        assert raw.index == 0
        np.testing.assert_array_equal(raw.next_point(), [0.0, 0.0])
