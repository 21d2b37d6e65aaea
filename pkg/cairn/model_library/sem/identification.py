#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Identification conditions and the free/fixed parameter pattern.

Per structural node:

* 3 or more indicators: the first loading is fixed to 1 (scale marker),
* 2 indicators: the first loading is fixed to 1 and, when the node has no
  relation yet, a relation with one random other latent is added,
* 1 indicator (and every covariate): loading fixed to 1, error fixed to 0.
"""
import logging
from collections import namedtuple

import numpy as np

from cairn.common.errors import SpecError
from cairn.model_library.defn import ExogenousCovariance, NodeRole
from cairn.model_library.graphs.dag import is_acyclic
from cairn.model_library.sem.params import SemLayout, SemParameters

logger = logging.getLogger('cairn.model_library.sem.identification')

Identification = namedtuple('Identification', ['markers', 'zero_error', 'added_edges'])
Identification.__doc__ = ('markers: canonical indicator index fixed to 1 per node; '
                          'zero_error: canonical indicators with error fixed to 0; '
                          'added_edges: (i, j) relations added for two-indicator latents')


def _candidate_edges(node, partner, adjacency, prior):
    edges = []
    for a, b in ((node, partner), (partner, node)):
        if prior is not None and not prior.allows(a, b):
            continue
        adj = np.array(adjacency)
        adj[a, b] = 1
        if is_acyclic(adj):
            edges.append((a, b))
    return edges


def identify_measurement(measurement, structural, rng, prior=None):
    """
    Decide markers, zero-error indicators and added relations.

    A latent variable with exactly two indicators gets one added relation
    to another node, unless it already takes part in a relation of
    ``structural``; such a latent is left as it is. The search calls this
    on the empty structure, so there every two-indicator latent gets one.

    Parameters
    ----------
    measurement : MeasurementSpec
    structural : StructuralSpec
    rng : numpy.random.Generator
        Used for the random partner and direction of two-indicator latents.
    prior : PriorKnowledge, optional
        Added relations never violate it.

    Returns
    -------
    Identification
    """
    if len(measurement.latent_names) == 0:
        raise SpecError('Identification needs at least one latent variable')

    node_indicators = measurement.node_indicator_indices()
    roles = measurement.node_roles
    adjacency = np.array(structural.adjacency)
    markers = []
    zero_error = set()
    added = []

    for node, indices in enumerate(node_indicators):
        markers.append(indices[0])
        if roles[node] == NodeRole.COVARIATE or len(indices) == 1:
            zero_error.add(indices[0])
            continue
        if len(indices) != 2:
            continue
        if adjacency[node, :].any() or adjacency[:, node].any():
            continue

        latents = [j for j in range(measurement.n_nodes) if j != node and roles[j] == NodeRole.LATENT]
        covariates = [j for j in range(measurement.n_nodes) if roles[j] == NodeRole.COVARIATE]
        chosen = None
        for pool in (latents, covariates):
            for partner in rng.permutation(pool) if pool else []:
                options = _candidate_edges(node, int(partner), adjacency, prior)
                if not options:
                    continue
                if len(options) == 2:
                    chosen = options[int(rng.integers(2))]
                else:
                    chosen = options[0]
                break
            if chosen is not None:
                break
        if chosen is None:
            raise SpecError('Latent {} has two indicators and no admissible relation to another node'.format(
                measurement.node_names[node]))
        adjacency[chosen] = 1
        added.append(chosen)
        logger.info('Two-indicator latent {}: added relation {} -> {}'.format(
            measurement.node_names[node], measurement.node_names[chosen[0]], measurement.node_names[chosen[1]]),
            extra={'event': 'identification_edge',
                   'edge': [measurement.node_names[chosen[0]], measurement.node_names[chosen[1]]]})

    return Identification(tuple(markers), frozenset(zero_error), tuple(added))


def build_pattern(measurement, structural, identification, exogenous_covariances=ExogenousCovariance.FREE):
    """
    Free/fixed parameter pattern for ``structural`` under ``identification``.

    Fixed loadings are 1 (markers, covariates), fixed errors 0; free entries
    are set to 0 and filled by start values later.
    """
    layout = SemLayout.from_specs(measurement, structural, identification.markers)
    endo, exo = layout.endogenous, layout.exogenous
    y, x = layout.y_indicators, layout.x_indicators
    adj = structural.adjacency
    m, n, q, r = len(endo), len(exo), len(y), len(x)

    mask = {'B': np.zeros((m, m), dtype=bool),
            'Gamma': np.zeros((m, n), dtype=bool),
            'Phi': np.zeros((n, n), dtype=bool),
            'Psi': np.eye(m, dtype=bool),
            'LambdaX': np.zeros((r, n), dtype=bool),
            'LambdaY': np.zeros((q, m), dtype=bool),
            'ThetaDelta': np.zeros((r, r), dtype=bool),
            'ThetaEpsilon': np.zeros((q, q), dtype=bool),
            }
    for a, j in enumerate(endo):
        for b, i in enumerate(endo):
            mask['B'][a, b] = bool(adj[i, j])
        for b, i in enumerate(exo):
            mask['Gamma'][a, b] = bool(adj[i, j])

    if exogenous_covariances == ExogenousCovariance.FREE:
        mask['Phi'][:] = True
    else:
        np.fill_diagonal(mask['Phi'], True)

    lambda_y = np.zeros((q, m))
    lambda_x = np.zeros((r, n))
    for nodes, indicators, lam, lam_mask, theta in \
            ((endo, y, lambda_y, mask['LambdaY'], mask['ThetaEpsilon']),
             (exo, x, lambda_x, mask['LambdaX'], mask['ThetaDelta'])):
        column = {node: c for c, node in enumerate(nodes)}
        for row, i in enumerate(indicators):
            c = column[layout.indicator_node[i]]
            if i == layout.markers[layout.indicator_node[i]]:
                lam[row, c] = 1.
            else:
                lam_mask[row, c] = True
            theta[row, row] = i not in identification.zero_error

    return SemParameters(B=np.zeros((m, m)), Gamma=np.zeros((m, n)), Phi=np.zeros((n, n)), Psi=np.zeros((m, m)),
                         LambdaX=lambda_x, LambdaY=lambda_y,
                         ThetaDelta=np.zeros((r, r)), ThetaEpsilon=np.zeros((q, q)),
                         free_mask=mask, layout=layout)


def apply_identification(measurement, structural, rng, prior=None,
                         exogenous_covariances=ExogenousCovariance.FREE):
    """
    Enforce the identification conditions on a structure.

    Returns
    -------
    tuple
        (pattern, structural) where pattern is the free/fixed SemParameters
        pattern and structural the possibly augmented StructuralSpec.
    """
    identification = identify_measurement(measurement, structural, rng, prior)
    augmented = structural
    for i, j in identification.added_edges:
        augmented = augmented.with_edge(i, j)
    return build_pattern(measurement, augmented, identification, exogenous_covariances), augmented


def free_parameter_count(pattern):
    """t, the number of free parameters (Phi counted over its lower triangle)."""
    return pattern.n_free
