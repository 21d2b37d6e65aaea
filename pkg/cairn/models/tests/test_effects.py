#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

'''
factor scores and total effect tests
'''
import unittest
from collections import OrderedDict

import numpy as np
import pytest
from parameterized import parameterized

from cairn.common.errors import DegenerateMeasurementError, NoEstimateError
from cairn.model_library.correlations.polycorr import mixed_correlation_matrix
from cairn.model_library.defn import EdgeDirection, ExogenousCovariance, IdaMethod, StabilityKind
from cairn.model_library.graphs.dag import Cpdag, Dag, dag_extensions, dag_to_cpdag, enumerate_dags
from cairn.model_library.sem.identification import build_pattern, identify_measurement
from cairn.model_library.sem.structure import CONTINUOUS, MeasurementSpec, StructuralSpec
from cairn.models.effects import (EffectEstimate, SubsetScores, estimate_total_effects, factor_projection, ida_effects,
                                  parent_sets, sample_factor_scores, subset_scores, total_effect)
from cairn.models.estimator import fit
from cairn.models.simulation import simulate
from cairn.models.stability import RelevantStructure, subsample_indices


class TestFactorProjection(unittest.TestCase):
    def test_three_indicators(self):
        model = factor_projection(np.ones((3, 1)), np.eye(3))
        np.testing.assert_allclose(model.beta, [[0.25, 0.25, 0.25]])
        np.testing.assert_allclose(model.cond_var, [[0.25]])

    def test_error_free(self):
        model = factor_projection([[1.]], [0.])
        np.testing.assert_allclose(model.beta, [[1.]])
        np.testing.assert_allclose(model.cond_var, [[0.]], atol=1e-12)

    def test_vector_theta(self):
        a = factor_projection(np.ones((3, 1)), [1., 2., 3.])
        b = factor_projection(np.ones((3, 1)), np.diag([1., 2., 3.]))
        np.testing.assert_allclose(a.beta, b.beta)

    def test_singular(self):
        with self.assertRaises(DegenerateMeasurementError):
            factor_projection(np.ones((2, 1)), np.zeros(2))

    def test_negative_error(self):
        with self.assertRaises(ValueError):
            factor_projection(np.ones((2, 1)), [1., -1.])

    def test_sampling(self):
        model = factor_projection([[1.]], [0.])
        x = np.array([[0.5], [-1.], [2.]])
        np.testing.assert_allclose(sample_factor_scores(model, x, np.random.default_rng(0)), x, atol=1e-6)
        with self.assertRaises(ValueError):
            sample_factor_scores(model, np.ones((3, 2)), np.random.default_rng(0))

    def test_sampled_moments(self):
        model = factor_projection(np.ones((3, 1)), np.eye(3))
        x = np.tile([[1., 1., 1.]], (20000, 1))
        draws = sample_factor_scores(model, x, np.random.default_rng(1))
        self.assertAlmostEqual(draws.mean(), 0.75, delta=0.02)
        self.assertAlmostEqual(draws.var(), 0.25, delta=0.02)


def _single_latent():
    """covariate z -> F, var(F) = 2"""
    indicators = OrderedDict([('f1', 'F'), ('f2', 'F'), ('f3', 'F')])
    measurement = MeasurementSpec(('F',), indicators, {name: CONTINUOUS for name in indicators},
                                  covariate_names=('z',))
    structural = StructuralSpec.from_edges(measurement, [('z', 'F')])
    ident = identify_measurement(measurement, structural, np.random.default_rng(0))
    pattern = build_pattern(measurement, structural, ident)
    params = pattern.with_matrices({'Gamma': np.array([[0.8]]), 'Phi': np.eye(1), 'Psi': np.array([[1.36]]),
                                    'LambdaY': np.array([[1.], [0.8], [1.2]]), 'LambdaX': np.eye(1),
                                    'ThetaEpsilon': 0.5 * np.eye(3), 'ThetaDelta': np.zeros((1, 1))})
    return measurement, params


class TestSubsetScores(unittest.TestCase):
    def test_unit_variance_scores(self):
        measurement, params = _single_latent()
        values = simulate(measurement, params, 5000, np.random.default_rng(2)).values()
        scores = subset_scores(params, measurement, values, np.random.default_rng(3), standardize=False)
        self.assertEqual(scores.shape, (5000, 2))
        self.assertAlmostEqual(scores[:, 0].std(), 1., delta=0.05)
        np.testing.assert_array_equal(scores[:, 1], values[:, 3])
        self.assertGreater(np.corrcoef(scores[:, 0], scores[:, 1])[0, 1], 0.3)

    def test_standardized_covariate(self):
        measurement, params = _single_latent()
        values = simulate(measurement, params, 500, np.random.default_rng(4)).values()
        scores = subset_scores(params, measurement, values, np.random.default_rng(5))
        self.assertAlmostEqual(scores[:, 1].mean(), 0., places=10)
        self.assertAlmostEqual(scores[:, 1].std(), 1., places=10)

    def test_deterministic(self):
        measurement, params = _single_latent()
        values = simulate(measurement, params, 100, np.random.default_rng(6)).values()
        a = subset_scores(params, measurement, values, np.random.default_rng(7))
        b = subset_scores(params, measurement, values, np.random.default_rng(7))
        np.testing.assert_array_equal(a, b)


def _collider_scores(N=5000, seed=0):
    # 0 -> 2 <- 1 with coefficients 0.5 and 0.3
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(N), rng.standard_normal(N)
    c = 0.5 * a + 0.3 * b + 0.5 * rng.standard_normal(N)
    return np.column_stack([a, b, c])


class TestIda(unittest.TestCase):
    @parameterized.expand([(3,), (4,)])
    def test_local_matches_global(self, n):
        seen = set()
        for dag in enumerate_dags(n):
            c = dag_to_cpdag(dag)
            if c in seen:
                continue
            seen.add(c)
            for x in range(n):
                self.assertEqual(set(parent_sets(c, x, IdaMethod.LOCAL)), set(parent_sets(c, x, IdaMethod.GLOBAL)),
                                 msg='{} node {}'.format(c, x))

    def test_global_counts_every_extension(self):
        c = Cpdag(3, frozenset(), frozenset([(0, 1), (1, 2)]))
        self.assertEqual(len(parent_sets(c, 1, IdaMethod.GLOBAL)), len(list(dag_extensions(c))))
        self.assertEqual(len(parent_sets(c, 1, 'global')), 3)

    def test_undirected_pair(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(2000)
        scores = np.column_stack([x, 0.6 * x + 0.8 * rng.standard_normal(2000)])
        c = Cpdag(2, frozenset(), frozenset([(0, 1)]))
        effects = ida_effects(c, scores, 0, 1)
        self.assertEqual(len(effects), 2)
        self.assertAlmostEqual(effects[0], 0.6, delta=0.05)
        self.assertEqual(effects[1], 0.)

    def test_collider(self):
        scores = _collider_scores()
        c = dag_to_cpdag(Dag(3, frozenset([(0, 2), (1, 2)])))
        self.assertAlmostEqual(ida_effects(c, scores, 0, 2)[0], 0.5, delta=0.05)
        self.assertAlmostEqual(ida_effects(c, scores, 1, 2)[0], 0.3, delta=0.05)
        self.assertEqual(ida_effects(c, scores, 2, 0), [0.])


class TestTotalEffect(unittest.TestCase):
    def test_median(self):
        self.assertAlmostEqual(total_effect([[0.1, 0.2], [0.3]]), 0.2)
        self.assertAlmostEqual(total_effect([[0.1, 0.2], [0.3]], sigma_x=2., sigma_y=4.), 0.1)
        self.assertAlmostEqual(total_effect([[0.1, 0.2], [0.3]], sigma_x=2.), 0.2)

    def test_empty(self):
        with self.assertRaises(NoEstimateError):
            total_effect([[], []])

    def test_label(self):
        estimate = EffectEstimate('a', 'b', (0.5,), 0.5, 0.75)
        self.assertEqual(estimate.label(), '0.75/0.5')
        self.assertEqual(EffectEstimate('a', 'b', (0.5,), 0.5).label(), '0.5')
        self.assertEqual(estimate.to_dict()['n_estimates'], 1)

    def test_estimate_total_effects(self):
        indicators = OrderedDict([('a1', 'A'), ('b1', 'B'), ('c1', 'C')])
        measurement = MeasurementSpec(('A', 'B', 'C'), indicators, {name: CONTINUOUS for name in indicators})
        c = Cpdag(3, frozenset([(0, 2), (1, 2)]), frozenset())
        subsets = [SubsetScores(k, c, _collider_scores(seed=k)) for k in range(3)]
        relevant = [RelevantStructure(('A', 'C'), StabilityKind.CAUSAL_PATH, 0.9, EdgeDirection.DIRECTED, 0.9),
                    RelevantStructure(('A', 'B'), StabilityKind.EDGE, 0.7, EdgeDirection.UNDIRECTED, 0.7)]
        estimates = estimate_total_effects(relevant, subsets, measurement)
        self.assertEqual(len(estimates), 1)
        e = estimates[0]
        self.assertEqual((e.source, e.target), ('A', 'C'))
        self.assertEqual(len(e.effects), 3)
        self.assertTrue(e.standardized)
        self.assertEqual(e.reliability, 0.9)
        pooled = np.vstack([s.scores for s in subsets])
        scale = pooled[:, 0].std(ddof=1) / pooled[:, 2].std(ddof=1)
        self.assertAlmostEqual(e.total, float(np.median(e.effects)) * scale)
        self.assertAlmostEqual(e.total, 0.5 * scale, delta=0.05)


def _planted_collider():
    """A -> B <- C with standardized coefficients 0.5, four indicators per latent"""
    indicators = OrderedDict(('{}{}'.format(latent.lower(), k), latent) for latent in 'ABC' for k in range(1, 5))
    measurement = MeasurementSpec(('A', 'B', 'C'), indicators, {name: CONTINUOUS for name in indicators})
    structural = StructuralSpec.from_edges(measurement, [('A', 'B'), ('C', 'B')])
    ident = identify_measurement(measurement, structural, np.random.default_rng(0))
    pattern = build_pattern(measurement, structural, ident, ExogenousCovariance.ZERO)
    values = {name: np.array(m) for name, m in pattern.matrices().items()}
    mask = pattern.free_mask
    values['Gamma'][mask['Gamma']] = 0.5
    values['LambdaX'][mask['LambdaX']] = 1.
    values['LambdaY'][mask['LambdaY']] = 1.
    values.update(Phi=np.eye(2), Psi=np.array([[0.5]]), ThetaDelta=0.25 * np.eye(8), ThetaEpsilon=0.25 * np.eye(4))
    cpdag = dag_to_cpdag(Dag.from_adjacency(structural.adjacency))
    return measurement, pattern, pattern.with_matrices(values), cpdag


@pytest.mark.slow
class TestPlantedEffect(unittest.TestCase):
    def test_sign_and_magnitude(self):
        measurement, pattern, truth, cpdag = _planted_collider()
        self.assertEqual(cpdag.directed_edges, frozenset([(0, 1), (2, 1)]))
        relevant = [RelevantStructure(('A', 'B'), StabilityKind.CAUSAL_PATH, 1., EdgeDirection.DIRECTED, 1.)]
        totals = []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            d = simulate(measurement, truth, 2000, rng)
            subsets = []
            for k, rows in enumerate(subsample_indices(d.n_rows, 4, rng)):
                sub = d.take(rows)
                result = fit(pattern, mixed_correlation_matrix(sub).matrix, sub.n_rows)
                scores = subset_scores(result.theta_hat, measurement, sub.values(), rng)
                subsets.append(SubsetScores(k, cpdag, scores))
            estimates = estimate_total_effects(relevant, subsets, measurement)
            self.assertEqual(len(estimates), 1)
            totals.append(estimates[0].total)
        totals = np.array(totals)
        self.assertGreaterEqual(np.sum(totals > 0), 95)
        # sampled factor scores are attenuated by the indicator reliability
        self.assertAlmostEqual(float(np.median(totals)), 0.5, delta=0.15)


if __name__ == '__main__':
    unittest.main()
