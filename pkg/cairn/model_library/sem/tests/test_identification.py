#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

'''
identification tester
'''
import unittest
from collections import OrderedDict

import numpy as np
from parameterized import parameterized

from cairn.common.errors import SpecError
from cairn.model_library.defn import ExogenousCovariance
from cairn.model_library.sem.identification import (apply_identification, build_pattern, free_parameter_count,
                                                    identify_measurement)
from cairn.model_library.sem.structure import CONTINUOUS, MeasurementSpec, PriorKnowledge, StructuralSpec


def _measurement(sizes, covariates=()):
    indicators = OrderedDict()
    latents = []
    for k, size in enumerate(sizes):
        latent = 'L{}'.format(k + 1)
        latents.append(latent)
        for i in range(size):
            indicators['{}_{}'.format(latent, i + 1)] = latent
    return MeasurementSpec(tuple(latents), indicators, {name: CONTINUOUS for name in indicators},
                           covariate_names=tuple(covariates))


def _t(measurement, edges, policy):
    structural = StructuralSpec.from_edges(measurement, edges)
    pattern, _ = apply_identification(measurement, structural, np.random.default_rng(0),
                                      exogenous_covariances=policy)
    return free_parameter_count(pattern)


class TestIdentification(unittest.TestCase):
    def test_markers_are_first_indicators(self):
        m = _measurement([3, 3, 3])
        ident = identify_measurement(m, StructuralSpec.empty(m), np.random.default_rng(0))
        self.assertEqual(ident.markers, (0, 3, 6))
        self.assertEqual(ident.zero_error, frozenset())
        self.assertEqual(ident.added_edges, ())

    def test_two_causes_free_count(self):
        m = _measurement([3, 3, 3])
        self.assertEqual(_t(m, [('L1', 'L3'), ('L2', 'L3')], ExogenousCovariance.FREE), 21)
        self.assertEqual(_t(m, [('L1', 'L3'), ('L2', 'L3')], ExogenousCovariance.ZERO), 20)

    def test_single_indicator(self):
        m = _measurement([1, 3])
        structural = StructuralSpec.empty(m)
        ident = identify_measurement(m, structural, np.random.default_rng(0))
        self.assertEqual(ident.zero_error, frozenset([0]))
        pattern = build_pattern(m, structural, ident)
        self.assertEqual(pattern.loadings()[0, 0], 1.)
        self.assertEqual(pattern.error_variances()[0], 0.)
        self.assertFalse(pattern.free_mask['ThetaDelta'][0, 0])

    def test_covariate(self):
        m = _measurement([3], covariates=['age'])
        ident = identify_measurement(m, StructuralSpec.empty(m), np.random.default_rng(0))
        self.assertEqual(ident.markers, (0, 3))
        self.assertEqual(ident.zero_error, frozenset([3]))

    @parameterized.expand([(0,), (1,), (2,), (3,)])
    def test_two_indicators_add_one_relation(self, seed):
        m = _measurement([2, 3, 3])
        structural = StructuralSpec.empty(m)
        pattern, augmented = apply_identification(m, structural, np.random.default_rng(seed))
        edges = augmented.edges()
        self.assertEqual(len(edges), 1)
        self.assertIn(0, edges[0])
        self.assertEqual(structural.edges(), [])

    def test_connected_two_indicator_latent_is_left_alone(self):
        m = _measurement([2, 3])
        structural = StructuralSpec.from_edges(m, [('L2', 'L1')])
        ident = identify_measurement(m, structural, np.random.default_rng(0))
        self.assertEqual(ident.added_edges, ())

    def test_added_relation_respects_prior(self):
        m = _measurement([2, 3, 3])
        prior = PriorKnowledge.from_names(m.node_names, forbidden=[('L1', 'L2'), ('L2', 'L1'), ('L3', 'L1')])
        for seed in range(5):
            ident = identify_measurement(m, StructuralSpec.empty(m), np.random.default_rng(seed), prior)
            self.assertEqual(ident.added_edges, ((0, 2),))

    def test_no_admissible_relation(self):
        m = _measurement([2, 3])
        prior = PriorKnowledge.from_names(m.node_names, forbidden=[('L1', 'L2'), ('L2', 'L1')])
        with self.assertRaises(SpecError):
            identify_measurement(m, StructuralSpec.empty(m), np.random.default_rng(0), prior)

    def test_no_latents(self):
        m = MeasurementSpec((), OrderedDict(), {}, covariate_names=('a', 'b'))
        with self.assertRaises(SpecError):
            identify_measurement(m, StructuralSpec.empty(m), np.random.default_rng(0))


class TestFreeParameterCount(unittest.TestCase):
    def test_zero_policy_edge_adds_one(self):
        m = _measurement([3, 3, 3])
        base = [('L1', 'L3'), ('L2', 'L3')]
        self.assertEqual(_t(m, base + [('L1', 'L2')], ExogenousCovariance.ZERO),
                         _t(m, base, ExogenousCovariance.ZERO) + 1)

    def test_free_policy_edge_into_endogenous_adds_one(self):
        m = _measurement([3, 3, 3])
        self.assertEqual(_t(m, [('L1', 'L3'), ('L2', 'L3')], ExogenousCovariance.FREE),
                         _t(m, [('L1', 'L3')], ExogenousCovariance.FREE) + 1)

    def test_phi_pattern(self):
        m = _measurement([3, 3, 3])
        structural = StructuralSpec.from_edges(m, [('L1', 'L3')])
        ident = identify_measurement(m, structural, np.random.default_rng(0))
        free = build_pattern(m, structural, ident, ExogenousCovariance.FREE).free_mask['Phi']
        zero = build_pattern(m, structural, ident, ExogenousCovariance.ZERO).free_mask['Phi']
        self.assertTrue(free.all())
        np.testing.assert_array_equal(zero, np.eye(2, dtype=bool))


if __name__ == '__main__':
    unittest.main()
