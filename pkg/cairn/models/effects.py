#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Total causal effects of relevant causal paths.

Latent values are sampled per row from their distribution given the
indicators (the factor-score projection of a fitted measurement model).
On these scores, every parent set of the cause that is consistent with a
CPDAG yields a possible effect by adjusted regression. The possible effects
of all subsets are pooled and summarized by their median.
"""
import itertools
import logging
from collections import OrderedDict, namedtuple
from dataclasses import dataclass

import numpy as np

import cairn.model_library.sem.sem_calc as sem_calc
from cairn.common.errors import DegenerateMeasurementError, NoEstimateError
from cairn.model_library.correlations.polycorr import zscore
from cairn.model_library.defn import EdgeDirection, IdaMethod, IndicatorType, NodeRole
from cairn.model_library.graphs.dag import dag_extensions

logger = logging.getLogger('cairn.models.effects')

_SINGULAR_COND = 1e12

SubsetScores = namedtuple('SubsetScores', ['subset', 'cpdag', 'scores'])
SubsetScores.__doc__ = 'scores: rows x nodes matrix of sampled latent values and covariates, in node order'


@dataclass(frozen=True, eq=False)
class FactorScoreModel:
    beta: np.ndarray
    cond_var: np.ndarray


@dataclass(frozen=True)
class EffectEstimate:
    source: str
    target: str
    effects: tuple
    total: float
    reliability: float = None
    standardized: bool = False

    def label(self):
        """``reliability/total_effect`` as printed next to a relevant relation."""
        if self.reliability is None:
            return '{:.3g}'.format(self.total)
        return '{:.2f}/{:.3g}'.format(self.reliability, self.total)

    def to_dict(self):
        return OrderedDict([('source', self.source), ('target', self.target),
                            ('total_effect', self.total), ('reliability', self.reliability),
                            ('standardized', self.standardized), ('n_estimates', len(self.effects)),
                            ('label', self.label())])


def factor_projection(Lambda, Theta):
    """
    Projection of indicators onto latent values.

    Parameters
    ----------
    Lambda : numpy.ndarray
        p x k loadings of unit-variance, mutually uncorrelated latents.
    Theta : numpy.ndarray
        p x p diagonal error covariance (a length-p vector is accepted).

    Returns
    -------
        FactorScoreModel
            beta = Lambda' (Theta + Lambda Lambda')^-1 and
            cond_var = I - beta Lambda.

    Raises
    ------
        DegenerateMeasurementError
            If Theta + Lambda Lambda' is singular.
    """
    Lambda = np.atleast_2d(np.asarray(Lambda, dtype=float))
    Theta = np.asarray(Theta, dtype=float)
    if Theta.ndim == 1:
        Theta = np.diag(Theta)
    if Theta.shape != (Lambda.shape[0], Lambda.shape[0]):
        raise ValueError('Theta has shape {} for {} indicators'.format(Theta.shape, Lambda.shape[0]))
    if np.any(np.diag(Theta) < 0):
        raise ValueError('Error variances must be nonnegative')
    A = Theta + Lambda @ Lambda.T
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) > _SINGULAR_COND:
        raise DegenerateMeasurementError('Theta + Lambda Lambda\' is singular')
    beta = np.linalg.solve(A, Lambda).T
    cond_var = np.eye(Lambda.shape[1]) - beta @ Lambda
    cond_var = 0.5 * (cond_var + cond_var.T)
    return FactorScoreModel(beta, cond_var)


def sample_factor_scores(model, x_rows, rng):
    """One draw per row from Normal(beta x, cond_var)."""
    x_rows = np.atleast_2d(np.asarray(x_rows, dtype=float))
    if x_rows.shape[1] != model.beta.shape[1]:
        raise ValueError('Rows have {} columns, the projection expects {}'.format(
            x_rows.shape[1], model.beta.shape[1]))
    mean = x_rows @ model.beta.T
    w, v = np.linalg.eigh(model.cond_var)
    factor = v * np.sqrt(np.clip(w, 0., None))
    return mean + rng.standard_normal(mean.shape) @ factor.T


def subset_scores(params, measurement, values, rng, standardize=True):
    """
    Latent scores and covariates of one subset, in node order.

    Loadings are rescaled to unit latent variance with the model-implied node
    covariance before the projection; all latents are projected jointly from
    their indicators.

    Parameters
    ----------
    params : SemParameters
        Fitted parameters of the subset's model.
    measurement : MeasurementSpec
    values : numpy.ndarray
        Rows x indicators in canonical order.
    rng : numpy.random.Generator
    standardize : bool
        Z-score the indicator columns and continuous covariates (for fits to
        a correlation matrix).

    Returns
    -------
        numpy.ndarray
    """
    values = np.asarray(values, dtype=float)
    types = list(measurement.column_types.values())
    x = values.copy()
    if standardize:
        for k, ctype in enumerate(types):
            is_covariate = measurement.indicator_names[k] in measurement.covariate_names
            if not is_covariate or ctype.kind == IndicatorType.CONTINUOUS:
                x[:, k] = zscore(values[:, k])

    node_sd = np.sqrt(np.clip(np.diag(sem_calc.node_covariance(params)), 0., None))
    lam = params.loadings() * node_sd
    theta = params.error_variances()
    roles = measurement.node_roles
    latents = [k for k, role in enumerate(roles) if role == NodeRole.LATENT]
    node_indicators = measurement.node_indicator_indices()

    scores = np.empty((values.shape[0], measurement.n_nodes))
    rows = [i for k in latents for i in node_indicators[k]]
    model = factor_projection(lam[np.ix_(rows, latents)], theta[rows])
    scores[:, latents] = sample_factor_scores(model, x[:, rows], rng)
    for k, role in enumerate(roles):
        if role == NodeRole.COVARIATE:
            scores[:, k] = x[:, node_indicators[k][0]]
    return scores


def _adjusted_slope(scores, x, y, parents):
    if y in parents:
        return 0.
    columns = [x] + list(parents)
    design = np.column_stack([np.ones(scores.shape[0]), scores[:, columns]])
    coef, _, _, _ = np.linalg.lstsq(design, scores[:, y], rcond=None)
    return float(coef[1])


def _locally_valid(c, candidate, parents):
    for a, b in itertools.combinations(candidate, 2):
        if not c.adjacent(a, b):
            return False
    return all(c.adjacent(a, p) for a in candidate for p in parents)


def parent_sets(c, x, method=IdaMethod.LOCAL):
    """
    Possible parent sets of ``x`` in the DAG extensions of ``c``.

    LOCAL orients every subset of the undirected neighbours into ``x`` that
    creates no new v-structure; GLOBAL lists the parents of ``x`` in every
    member of the equivalence class (with repetitions).
    """
    method = IdaMethod(method)
    if method == IdaMethod.GLOBAL:
        return [tuple(g.parents(x)) for g in dag_extensions(c)]
    parents = c.directed_parents(x)
    siblings = c.undirected_neighbors(x)
    sets = []
    for size in range(len(siblings) + 1):
        for candidate in itertools.combinations(siblings, size):
            if _locally_valid(c, candidate, parents):
                sets.append(tuple(sorted(parents + list(candidate))))
    return sets


def ida_effects(c, scores, x, y, method=IdaMethod.LOCAL):
    """
    Possible total effects of node ``x`` on node ``y``.

    Parameters
    ----------
    c : Cpdag
    scores : numpy.ndarray
        Rows x nodes values (sampled latent scores and covariates).
    x, y : int
        Node indices.
    method : IdaMethod

    Returns
    -------
        list of float
            One regression coefficient of ``x`` per parent set; 0 when ``y``
            is a parent of ``x``.
    """
    scores = np.asarray(scores, dtype=float)
    return [_adjusted_slope(scores, x, y, pa) for pa in parent_sets(c, x, method)]


def total_effect(multisets, sigma_x=None, sigma_y=None):
    """
    Median of the pooled possible effects, times sigma_x / sigma_y when both are given.

    Raises
    ------
        NoEstimateError
            If the pool is empty.
    """
    pooled = [e for effects in multisets for e in effects]
    if not pooled:
        raise NoEstimateError('No possible effects to summarize')
    total = float(np.median(pooled))
    if sigma_x is not None and sigma_y is not None:
        total *= sigma_x / sigma_y
    return total


def _continuous_nodes(measurement):
    types = measurement.column_types
    out = []
    for name, role in zip(measurement.node_names, measurement.node_roles):
        out.append(role == NodeRole.LATENT or types[name].kind == IndicatorType.CONTINUOUS)
    return out


def estimate_total_effects(relevant, subsets, measurement, method=IdaMethod.LOCAL):
    """
    Total effects of the directed relevant structures.

    Parameters
    ----------
    relevant : list of RelevantStructure
    subsets : list of SubsetScores
        CPDAG of the subset's model at the selected complexity and its scores.
    measurement : MeasurementSpec
    method : IdaMethod

    Returns
    -------
        list of EffectEstimate
            Undirected structures and pairs without any estimate are left out.
    """
    index = {name: k for k, name in enumerate(measurement.node_names)}
    continuous = _continuous_nodes(measurement)
    pooled_scores = np.vstack([s.scores for s in subsets]) if subsets else None
    estimates = []
    for structure in relevant:
        if structure.direction != EdgeDirection.DIRECTED:
            continue
        x, y = index[structure.pair[0]], index[structure.pair[1]]
        multisets = [ida_effects(s.cpdag, s.scores, x, y, method) for s in subsets]
        scaled = continuous[x] and continuous[y]
        sigma_x = float(np.std(pooled_scores[:, x], ddof=1)) if scaled else None
        sigma_y = float(np.std(pooled_scores[:, y], ddof=1)) if scaled else None
        try:
            total = total_effect(multisets, sigma_x, sigma_y)
        except NoEstimateError:
            logger.warning('No effect estimate for {} -> {}'.format(*structure.pair))
            continue
        effects = tuple(e for m in multisets for e in m)
        estimates.append(EffectEstimate(structure.pair[0], structure.pair[1], effects, total,
                                        structure.reliability, scaled))
    return estimates
