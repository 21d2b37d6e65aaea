#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

'''
polychoric / polyserial / mixed correlation tester
'''
import unittest
from collections import OrderedDict

import numpy as np
import pandas as pd
import pytest
import scipy.integrate
import scipy.stats
from parameterized import parameterized

import cairn.model_library.correlations.polycorr as pc
from cairn.common.errors import DegenerateColumnError, SpecError
from cairn.data.dataset import Dataset
from cairn.model_library.defn import MatrixKind
from cairn.model_library.sem.structure import CONTINUOUS, ordinal


def _latent_pair(rho, N, seed):
    rng = np.random.default_rng(seed)
    return rng.multivariate_normal([0., 0.], [[1., rho], [rho, 1.]], size=N)


def _cut(x, cuts):
    return 1 + np.searchsorted(np.asarray(cuts), x, side='right')


class TestThresholds(unittest.TestCase):
    def test_even_split(self):
        t = pc.estimate_thresholds([1, 2] * 50)
        np.testing.assert_allclose(t.tau, [0.], atol=1e-12)
        np.testing.assert_array_equal(t.levels, [1, 2])

    def test_one_sd(self):
        t = pc.estimate_thresholds([1] * 8413 + [2] * 1587)
        self.assertAlmostEqual(t.tau[0], 1., places=3)

    def test_quartiles(self):
        t = pc.estimate_thresholds([1] * 25 + [2] * 50 + [3] * 25)
        np.testing.assert_allclose(t.tau, [-0.6745, 0.6745], atol=1e-4)

    def test_category_missing_from_subsample(self):
        t = pc.estimate_thresholds([1] * 50 + [2] * 50, categories=3)
        self.assertEqual(len(t.tau), 2)
        self.assertTrue(np.all(np.diff(t.tau) > 0))
        self.assertAlmostEqual(t.tau[0], scipy.stats.norm.ppf(50 / 100.5))

    def test_single_category(self):
        with self.assertRaises(DegenerateColumnError):
            pc.estimate_thresholds([2] * 10)


class TestBivariateNormalCdf(unittest.TestCase):
    @parameterized.expand([(0.3, -0.2, 0.5), (-1.1, 0.4, -0.7), (1.5, 1.2, 0.9), (0., 0.8, 0.2),
                           (-0.5, -0.5, -0.3)])
    def test_against_scipy(self, h, k, rho):
        expected = scipy.stats.multivariate_normal([0., 0.], [[1., rho], [rho, 1.]]).cdf([h, k])
        self.assertAlmostEqual(float(pc.bivariate_normal_cdf(h, k, rho)), expected, places=4)

    @parameterized.expand([(0., 0., 0.5), (0., 0., -0.8), (0., -0.7, 0.3), (0., 1.3, -0.4), (1.2, 0., -0.6),
                           (-0.9, 0., 0.75)])
    def test_zero_threshold(self, h, k, rho):
        s = np.sqrt(1. - rho * rho)
        expected, _ = scipy.integrate.quad(lambda x: scipy.stats.norm.pdf(x) * scipy.stats.norm.cdf((k - rho * x) / s),
                                           -np.inf, h, epsabs=1e-12, epsrel=1e-12)
        self.assertAlmostEqual(float(pc.bivariate_normal_cdf(h, k, rho)), expected, places=7)

    def test_orthant(self):
        for rho in (-0.9, -0.3, 0., 0.4, 0.95):
            self.assertAlmostEqual(float(pc.bivariate_normal_cdf(0., 0., rho)),
                                   0.25 + np.arcsin(rho) / (2 * np.pi), places=7)

    def test_independent(self):
        value = pc.bivariate_normal_cdf(0.4, -0.3, 0.)
        self.assertAlmostEqual(float(value), scipy.stats.norm.cdf(0.4) * scipy.stats.norm.cdf(-0.3), places=8)

    def test_infinite_limits(self):
        out = pc.bivariate_normal_cdf(np.array([-np.inf, np.inf, 0.5, np.inf]),
                                      np.array([0.3, 0.3, np.inf, np.inf]), 0.4)
        np.testing.assert_allclose(out, [0., scipy.stats.norm.cdf(0.3), scipy.stats.norm.cdf(0.5), 1.])


class TestPairwise(unittest.TestCase):
    def test_pearson_zero_variance(self):
        with self.assertRaises(DegenerateColumnError):
            pc.pearson([1., 1., 1.], [1., 2., 3.])

    def test_identical_binary_on_boundary(self):
        x = np.array([1, 2] * 100)
        rho = pc.polychoric(x, x)
        self.assertEqual(rho, pc.RHO_BOUND)

    def test_polychoric(self):
        z = _latent_pair(0.5, 20000, 3)
        rho = pc.polychoric(_cut(z[:, 0], [-0.5, 0.7]), _cut(z[:, 1], [-1., 0., 1.]))
        self.assertAlmostEqual(rho, 0.5, delta=0.05)

    def test_polychoric_negative(self):
        z = _latent_pair(-0.6, 20000, 4)
        rho = pc.polychoric(_cut(z[:, 0], [0.2]), _cut(z[:, 1], [-0.3, 0.9]))
        self.assertAlmostEqual(rho, -0.6, delta=0.05)

    def test_polyserial(self):
        z = _latent_pair(0.6, 20000, 5)
        rho = pc.polyserial(z[:, 0], _cut(z[:, 1], [-0.8, 0.1, 1.2]))
        self.assertAlmostEqual(rho, 0.6, delta=0.05)


class TestRepair(unittest.TestCase):
    def test_nearest_positive_definite(self):
        bad = np.array([[1., .9, -.9], [.9, 1., .9], [-.9, .9, 1.]])
        self.assertLess(np.linalg.eigvalsh(bad).min(), 0.)
        fixed = pc.nearest_positive_definite(bad)
        np.testing.assert_allclose(np.diag(fixed), 1.)
        np.testing.assert_allclose(fixed, fixed.T)
        self.assertGreater(np.linalg.eigvalsh(fixed).min(), 0.)

    def test_covariance_keeps_scale(self):
        bad = np.array([[4., 3.], [3., 2.]])
        fixed = pc.nearest_positive_definite(bad, unit_diagonal=False)
        self.assertGreater(np.linalg.eigvalsh(fixed).min(), 0.)
        self.assertGreater(fixed[0, 0], 2.)


def _mixed_dataset(N=3000, seed=9):
    rng = np.random.default_rng(seed)
    cov = np.array([[1., .5, .4], [.5, 1., .3], [.4, .3, 1.]])
    z = rng.multivariate_normal(np.zeros(3), cov, size=N)
    frame = pd.DataFrame({'a': z[:, 0], 'b': _cut(z[:, 1], [-0.5, 0.5]), 'c': _cut(z[:, 2], [0.])})
    return Dataset(frame, OrderedDict([('a', CONTINUOUS), ('b', ordinal(3)), ('c', ordinal(2))]))


class TestMixedMatrix(unittest.TestCase):
    def test_correlation_matrix(self):
        result = pc.mixed_correlation_matrix(_mixed_dataset())
        self.assertEqual(result.kind, MatrixKind.CORRELATION)
        self.assertEqual(result.names, ('a', 'b', 'c'))
        self.assertFalse(result.repaired)
        self.assertEqual(result.boundary_pairs, ())
        np.testing.assert_allclose(np.diag(result.matrix), 1.)
        np.testing.assert_allclose(result.matrix, result.matrix.T)
        np.testing.assert_allclose(result.matrix, [[1., .5, .4], [.5, 1., .3], [.4, .3, 1.]], atol=0.1)
        self.assertGreater(result.min_eigenvalue, 0.)

    def test_covariance_needs_continuous(self):
        with self.assertRaises(SpecError):
            pc.mixed_correlation_matrix(_mixed_dataset(), use_covariance=True)

    def test_covariance(self):
        rng = np.random.default_rng(2)
        frame = pd.DataFrame(rng.normal(size=(200, 2)) * [1., 3.], columns=['a', 'b'])
        d = Dataset(frame, OrderedDict([('a', CONTINUOUS), ('b', CONTINUOUS)]))
        result = pc.mixed_correlation_matrix(d, use_covariance=True)
        self.assertEqual(result.kind, MatrixKind.COVARIANCE)
        np.testing.assert_allclose(result.matrix, np.cov(frame.to_numpy(), rowvar=False))

    def test_constant_column(self):
        frame = pd.DataFrame({'a': [1., 2., 3., 4.], 'b': [2., 2., 2., 2.]})
        d = Dataset(frame, OrderedDict([('a', CONTINUOUS), ('b', CONTINUOUS)]))
        with self.assertRaises(DegenerateColumnError) as cm:
            pc.mixed_correlation_matrix(d)
        self.assertEqual(cm.exception.column, 'b')

    def test_boundary_pair_is_reported(self):
        x = np.array([1, 2] * 100)
        frame = pd.DataFrame({'a': x, 'b': x})
        d = Dataset(frame, OrderedDict([('a', ordinal(2)), ('b', ordinal(2))]))
        result = pc.mixed_correlation_matrix(d)
        self.assertEqual(result.boundary_pairs, (('a', 'b'),))


@pytest.mark.slow
@pytest.mark.parametrize('rho', [-0.7, 0.2, 0.7])
def test_polychoric_monte_carlo(rho):
    z = _latent_pair(rho, 200000, 11)
    estimate = pc.polychoric(_cut(z[:, 0], [-1., -0.2, 0.6, 1.4]), _cut(z[:, 1], [-0.4, 0.8]))
    assert abs(estimate - rho) < 0.01


@pytest.mark.slow
def test_polyserial_monte_carlo():
    z = _latent_pair(0.45, 200000, 12)
    assert abs(pc.polyserial(z[:, 0], _cut(z[:, 1], [-0.9, 0.3])) - 0.45) < 0.01


if __name__ == '__main__':
    unittest.main()
