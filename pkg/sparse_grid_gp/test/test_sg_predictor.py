import logging
import unittest
from unittest import mock

import numpy as np

from sparse_grid_gp.dense_oracle import dense_fit, dense_predict, dense_weights
from sparse_grid_gp.exceptions import ShapeError
from sparse_grid_gp.kernels import MeanBasis, SeparableKernel
from sparse_grid_gp.sg_predictor import (ComponentFactors, SparseGridPredictor,
                                         VarianceProfile, compute_weights,
                                         predict_mean, predict_variance,
                                         q_solve, smolyak_terms)
from sparse_grid_gp.test.helpers.constant import (NUS, PHIS, SCHEDULES,
                                                  SMALL_LEVELS)
from sparse_grid_gp.test.helpers.utils import (dense_condition,
                                               dense_oracle_tolerance,
                                               ill_conditioned, relative_error,
                                               relative_residual,
                                               residual_bound, small_design)

logger = logging.getLogger()


class TestWeights(unittest.TestCase):

    def test_matches_dense_weights(self):
        rng = np.random.default_rng(0)
        for schedule in SCHEDULES:
            for d, eta in SMALL_LEVELS:
                design = small_design(schedule, d, eta)
                y = rng.standard_normal(design.N)
                for nu in NUS:
                    for phi in PHIS:
                        with self.subTest(schedule=schedule, d=d, eta=eta, nu=nu, phi=phi):
                            kernel = SeparableKernel.isotropic(d, nu, phi)
                            found = dense_condition(design.points, kernel)
                            if found is None:
                                self.skipTest("dense covariance is numerically singular")
                            sigma, cond = found
                            w_fast = compute_weights(design, kernel, y, 0.0)
                            w_dense = dense_weights(design.points, kernel, y)
                            if ill_conditioned(cond):
                                self.assertLessEqual(relative_residual(sigma, w_fast, y),
                                                     residual_bound(sigma, w_dense, y))
                            else:
                                self.assertLessEqual(relative_error(w_fast, w_dense),
                                                     dense_oracle_tolerance(cond))

    def test_q_solve_inverts_covariance(self):
        rng = np.random.default_rng(1)
        for schedule in SCHEDULES:
            for d, eta in [(1, 4), (2, 5), (3, 6)]:
                design = small_design(schedule, d, eta)
                kernel = SeparableKernel.isotropic(d, 2.5, 0.3, sigma2=1.7)
                sigma, cond = dense_condition(design.points, kernel)
                for columns in range(1, 5):
                    with self.subTest(schedule=schedule, d=d, eta=eta, columns=columns):
                        B = rng.standard_normal((design.N, columns))
                        rhs = sigma @ B
                        solved = q_solve(design, kernel, rhs)
                        if ill_conditioned(cond):
                            dense = dense_weights(design.points, kernel, rhs)
                            self.assertLessEqual(relative_residual(sigma, solved, rhs),
                                                 residual_bound(sigma, dense, rhs))
                        else:
                            self.assertLessEqual(relative_error(solved, B), dense_oracle_tolerance(cond))

    def test_term_order_does_not_change_weights(self):
        rng = np.random.default_rng(7)
        for schedule in SCHEDULES:
            with self.subTest(schedule=schedule):
                design = small_design(schedule, 3, 6)
                kernel = SeparableKernel.isotropic(3, 2.5, 0.3)
                y = rng.standard_normal(design.N)
                expected = compute_weights(design, kernel, y, 0.0)
                terms = smolyak_terms(design.eta, design.d)
                shuffled = tuple(terms[k] for k in rng.permutation(len(terms)))
                with mock.patch("sparse_grid_gp.sg_predictor.smolyak_terms", return_value=shuffled):
                    reordered = compute_weights(design, kernel, y, 0.0)
                np.testing.assert_allclose(reordered, expected, rtol=1e-10,
                                           atol=1e-12 * np.max(np.abs(expected)))

    def test_thread_pool_gives_identical_result(self):
        design = small_design("centered", 3, 7)
        kernel = SeparableKernel.isotropic(3, 1.5, 0.75)
        y = np.random.default_rng(2).standard_normal(design.N)
        serial = compute_weights(design, kernel, y, 0.0)
        threaded = compute_weights(design, kernel, y, 0.0, max_workers=4)
        np.testing.assert_array_equal(serial, threaded)

    def test_sigma2_scales_weights(self):
        design = small_design("boundary", 2, 5)
        kernel = SeparableKernel.isotropic(2, 2.5, 0.75)
        y = np.random.default_rng(3).standard_normal(design.N)
        np.testing.assert_allclose(compute_weights(design, kernel.with_sigma2(4.0), y, 0.0),
                                   compute_weights(design, kernel, y, 0.0) / 4.0, rtol=1e-12)

    def test_single_point_design(self):
        design = small_design("centered", 2, 2)
        kernel = SeparableKernel.isotropic(2, 2.5, 0.75, sigma2=2.0)
        w = compute_weights(design, kernel, [3.0], 1.0)
        np.testing.assert_allclose(w, [1.0])

    def test_shape_errors(self):
        design = small_design("centered", 2, 4)
        kernel = SeparableKernel.isotropic(2, 2.5, 0.75)
        with self.assertRaises(ShapeError):
            compute_weights(design, kernel, np.zeros(design.N + 1), 0.0)
        with self.assertRaises(ShapeError):
            ComponentFactors(design, SeparableKernel.isotropic(3, 2.5, 0.75))

    def test_terms_cover_the_fast_index_set(self):
        self.assertEqual(smolyak_terms(2, 2), (((1, 1), 1),))
        self.assertEqual(sum(a for _, a in smolyak_terms(7, 3)), 1)

    def test_factor_sharing(self):
        design = small_design("centered", 3, 6)
        factors = ComponentFactors(design, SeparableKernel.isotropic(3, 2.5, 0.75)).prepare()
        self.assertIs(factors.factor(0, 3), factors.factor(2, 3))


class TestPrediction(unittest.TestCase):

    def test_interpolates_observations(self):
        rng = np.random.default_rng(4)
        for schedule in SCHEDULES:
            for d, eta in [(1, 4), (2, 5), (3, 6)]:
                with self.subTest(schedule=schedule, d=d, eta=eta):
                    design = small_design(schedule, d, eta)
                    kernel = SeparableKernel.isotropic(d, 2.5, 0.3)
                    y = rng.standard_normal(design.N)
                    predictor = SparseGridPredictor(design, kernel).fit(y)
                    mean, variance = predictor.predict(design.points)
                    np.testing.assert_allclose(mean, y, rtol=1e-6, atol=1e-6 * np.max(np.abs(y)))
                    self.assertLessEqual(float(np.max(variance)), 1e-8)

    def test_mean_matches_dense(self):
        rng = np.random.default_rng(5)
        basis = MeanBasis.constant()
        for schedule in SCHEDULES:
            with self.subTest(schedule=schedule):
                design = small_design(schedule, 2, 5)
                kernel = SeparableKernel.isotropic(2, 1.5, 0.75, sigma2=0.5)
                y = rng.standard_normal(design.N)
                probes = rng.random((50, 2))
                w = compute_weights(design, kernel, y, 0.3)
                fast = predict_mean(design, kernel, w, lambda X: basis(X) @ [0.3], probes)
                dense, _ = dense_predict(dense_fit(design.points, kernel, basis, y, beta=[0.3]), probes)
                _, cond = dense_condition(design.points, kernel)
                self.assertLessEqual(relative_error(fast, dense), dense_oracle_tolerance(cond))

    def test_variance_matches_dense(self):
        rng = np.random.default_rng(6)
        for schedule in SCHEDULES:
            for d, eta in SMALL_LEVELS:
                design = small_design(schedule, d, eta)
                probes = rng.random((100, d))
                for nu in NUS:
                    for phi in PHIS:
                        with self.subTest(schedule=schedule, d=d, eta=eta, nu=nu, phi=phi):
                            kernel = SeparableKernel.isotropic(d, nu, phi, sigma2=1.3)
                            found = dense_condition(design.points, kernel)
                            if found is None:
                                self.skipTest("dense covariance is numerically singular")
                            tol = dense_oracle_tolerance(found[1])
                            model = dense_fit(design.points, kernel, None, np.zeros(design.N))
                            _, dense = dense_predict(model, probes)
                            fast, raw = predict_variance(design, kernel, probes, return_raw=True)
                            np.testing.assert_allclose(raw, dense, rtol=tol, atol=tol * kernel.sigma2)
                            self.assertTrue(np.all(fast >= 0))

    def test_variance_does_not_grow_with_level(self):
        probes = np.random.default_rng(8).random((40, 2))
        for schedule in SCHEDULES:
            for nu in NUS:
                with self.subTest(schedule=schedule, nu=nu):
                    kernel = SeparableKernel.isotropic(2, nu, 0.3, sigma2=1.3)
                    previous = np.full(len(probes), kernel.sigma2)
                    for eta in range(2, 8):
                        current = predict_variance(small_design(schedule, 2, eta), kernel, probes)
                        self.assertTrue(np.all(current <= previous + 1e-10 * kernel.sigma2))
                        previous = current

    def test_variance_profile_telescopes(self):
        design = small_design("centered", 2, 6)
        profile = VarianceProfile(design, SeparableKernel.isotropic(2, 2.5, 0.75))
        x = np.array([0.13, 0.61, 0.99])
        total = sum(profile.delta(0, level, x) for level in range(1, design.max_level + 1))
        np.testing.assert_allclose(total, profile.epsilon(0, 0, x) - profile.epsilon(0, design.max_level, x),
                                   atol=1e-14)
        np.testing.assert_allclose(profile.epsilon(0, 2, np.array([0.125, 0.5])), [0.0, 0.0], atol=1e-12)

    def test_far_field_recovers_prior(self):
        design = small_design("centered", 2, 4)
        kernel = SeparableKernel.isotropic(2, 0.5, 0.01, sigma2=2.0)
        w = compute_weights(design, kernel, np.ones(design.N), 0.0)
        x0 = np.array([0.31, 0.69])
        self.assertAlmostEqual(predict_mean(design, kernel, w, lambda X: np.full(len(X), 0.25), x0), 0.25)
        self.assertAlmostEqual(predict_variance(design, kernel, x0), 2.0)


if __name__ == "__main__":
    unittest.main()
