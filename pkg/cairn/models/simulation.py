#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Random structural equation models and data simulated from them.

A random model has a random DAG over n latents (every forward pair of a
random ordering related with probability 2 / (n - 1)) and a pure
measurement model. Continuous data are drawn from the model's normal
distribution; ordinal data are obtained by cutting every continuous column
into 2 to 7 ordered categories at random quantiles.
"""
import logging
from collections import OrderedDict, namedtuple
from dataclasses import dataclass

import numpy as np
import pandas as pd

import cairn.model_library.sem.sem_calc as sem_calc
from cairn.common.errors import SpecError
from cairn.data.dataset import Dataset
from cairn.data.sem_spec import SemSpec
from cairn.model_library.defn import (ExogenousCovariance, IndicatorType, MAX_CATEGORIES, MIN_CATEGORIES)
from cairn.model_library.graphs.dag import Dag, dag_to_cpdag, random_dag
from cairn.model_library.sem.identification import Identification, build_pattern
from cairn.model_library.sem.structure import CONTINUOUS, MeasurementSpec, StructuralSpec, ordinal

logger = logging.getLogger('cairn.models.simulation')

LOADING_RANGE = (0.5, 1.5)
COEFFICIENT_RANGE = (0.3, 0.9)
RELIABILITY_RANGE = (0.4, 0.8)
MIN_BIN_MASS = 0.05


@dataclass(frozen=True)
class SimScheme:
    name: str
    indicator_range: tuple
    indicator_type: IndicatorType = IndicatorType.CONTINUOUS
    n_latents: tuple = (4, 6)
    sample_sizes: tuple = (400, 1000, 2000)
    replicates: int = 20

    def __post_init__(self):
        lo, hi = self.indicator_range
        if lo < 1 or hi > 5 or lo > hi:
            raise SpecError('Indicator range of scheme {} must satisfy 1 <= min <= max <= 5, got {}'.format(
                self.name, self.indicator_range))

    def to_dict(self):
        return OrderedDict([('name', self.name), ('indicator_range', list(self.indicator_range)),
                            ('indicator_type', self.indicator_type.value), ('n_latents', list(self.n_latents)),
                            ('sample_sizes', list(self.sample_sizes)), ('replicates', self.replicates),
                            ('loading_range', list(LOADING_RANGE)), ('coefficient_range', list(COEFFICIENT_RANGE)),
                            ('reliability_range', list(RELIABILITY_RANGE)), ('min_bin_mass', MIN_BIN_MASS)])


SCHEMES = OrderedDict((s.name, s) for s in (
    SimScheme('C3-5', (3, 5), IndicatorType.CONTINUOUS),
    SimScheme('C1-4', (1, 4), IndicatorType.CONTINUOUS),
    SimScheme('O3-5', (3, 5), IndicatorType.ORDINAL),
    SimScheme('O1-4', (1, 4), IndicatorType.ORDINAL),
))


SimulatedSem = namedtuple('SimulatedSem', ['measurement', 'structural', 'params', 'truth'])
SimulatedSem.__doc__ = 'params: true SemParameters; truth: CPDAG of the true structure'


def _signed_uniform(rng, bounds, size=None):
    magnitude = rng.uniform(bounds[0], bounds[1], size=size)
    sign = np.where(rng.random(size=size) < 0.5, -1., 1.)
    return magnitude * sign


def random_sem(n, indicator_range, rng):
    """
    Draw a random identified SEM over n latents.

    Markers load 1, other loadings are uniform in +-[0.5, 1.5]; structural
    coefficients are uniform in +-[0.3, 0.9]. Exogenous latents are
    independent with unit variance, disturbances have unit variance and the
    error variance of every indicator gives it a reliability uniform in
    [0.4, 0.8] (0 for a single indicator).

    Parameters
    ----------
    n : int
        Number of latents, at least 2.
    indicator_range : tuple
        (min, max) indicators per latent.
    rng : numpy.random.Generator

    Returns
    -------
        SimulatedSem
    """
    if n < 2:
        raise SpecError('A random SEM needs at least 2 latents, got {}'.format(n))
    lo, hi = indicator_range
    if lo < 1 or lo > hi:
        raise SpecError('Invalid indicator range {}'.format(indicator_range))

    dag = random_dag(n, min(2. / (n - 1), 1.), rng)
    latent_names = ['L{}'.format(k + 1) for k in range(n)]
    indicator_map = OrderedDict()
    for k, latent in enumerate(latent_names):
        for i in range(int(rng.integers(lo, hi + 1))):
            indicator_map['{}_{}'.format(latent, i + 1)] = latent
    measurement = MeasurementSpec(latent_names, indicator_map, {name: CONTINUOUS for name in indicator_map})
    structural = StructuralSpec(measurement.node_names, dag.adjacency, measurement.node_roles)

    node_indicators = measurement.node_indicator_indices()
    markers = tuple(indices[0] for indices in node_indicators)
    zero_error = frozenset(indices[0] for indices in node_indicators if len(indices) == 1)
    pattern = build_pattern(measurement, structural, Identification(markers, zero_error, ()),
                            ExogenousCovariance.ZERO)

    values = {name: np.array(m) for name, m in pattern.matrices().items()}
    mask = pattern.free_mask
    for name in ('B', 'Gamma'):
        values[name][mask[name]] = _signed_uniform(rng, COEFFICIENT_RANGE, int(mask[name].sum()))
    for name in ('LambdaY', 'LambdaX'):
        values[name][mask[name]] = _signed_uniform(rng, LOADING_RANGE, int(mask[name].sum()))
    values['Phi'] = np.eye(values['Phi'].shape[0])
    values['Psi'] = np.eye(values['Psi'].shape[0])
    params = pattern.with_matrices(values)

    node_var = np.diag(sem_calc.node_covariance(params))
    lay = params.layout
    lam = params.loadings()
    for name, indicators in (('ThetaEpsilon', lay.y_indicators), ('ThetaDelta', lay.x_indicators)):
        theta = np.zeros((len(indicators), len(indicators)))
        for row, i in enumerate(indicators):
            if mask[name][row, row]:
                node = lay.indicator_node[i]
                reliability = rng.uniform(*RELIABILITY_RANGE)
                signal = lam[i, node] ** 2 * node_var[node]
                theta[row, row] = signal * (1. - reliability) / reliability
        values[name] = theta
    params = params.with_matrices(values)
    return SimulatedSem(measurement, structural, params, dag_to_cpdag(Dag.from_adjacency(dag.adjacency)))


def simulate(measurement, params, N, rng):
    """
    Draw N rows from the normal distribution of the SEM.

    Parameters
    ----------
    measurement : MeasurementSpec
    params : SemParameters
    N : int
    rng : numpy.random.Generator

    Returns
    -------
        Dataset
            Columns in canonical order, typed by ``measurement``.
    """
    if N < 1:
        raise SpecError('Sample size must be positive, got {}'.format(N))
    lay = params.layout
    m, n = len(lay.endogenous), len(lay.exogenous)
    xi = rng.multivariate_normal(np.zeros(n), params.Phi, size=N, method='eigh')
    zeta = rng.standard_normal((N, m)) * np.sqrt(np.diag(params.Psi))
    C = sem_calc.total_effects(params.B)
    eta = (xi @ params.Gamma.T + zeta) @ C.T

    eps = rng.standard_normal((N, len(lay.y_indicators))) * np.sqrt(np.diag(params.ThetaEpsilon))
    delta = rng.standard_normal((N, len(lay.x_indicators))) * np.sqrt(np.diag(params.ThetaDelta))
    values = np.empty((N, lay.p))
    values[:, list(lay.y_indicators)] = eta @ params.LambdaY.T + eps
    values[:, list(lay.x_indicators)] = xi @ params.LambdaX.T + delta
    frame = pd.DataFrame(values, columns=list(lay.indicator_names))
    return Dataset(frame, measurement.column_types)


def _cut_probabilities(w, rng, min_mass=MIN_BIN_MASS):
    while True:
        probs = np.sort(rng.random(w - 1))
        if np.all(np.diff(np.concatenate([[0.], probs, [1.]])) >= min_mass):
            return probs


def discretize(d, rng, min_mass=MIN_BIN_MASS):
    """
    Cut every continuous column into w ordered categories, w uniform in 2..7.

    Cut points are sample quantiles at sorted uniform probabilities with at
    least ``min_mass`` probability in every bin. Codes are 1..w.

    Returns
    -------
        Dataset
            Same rows and column order; the cut columns are typed ordinal.
    """
    frame = d.frame.copy()
    types = OrderedDict()
    for name, ctype in d.column_types.items():
        if ctype.kind != IndicatorType.CONTINUOUS:
            types[name] = ctype
            continue
        w = int(rng.integers(MIN_CATEGORIES, MAX_CATEGORIES + 1))
        cuts = np.quantile(frame[name].to_numpy(dtype=float), _cut_probabilities(w, rng, min_mass))
        frame[name] = 1 + np.searchsorted(cuts, frame[name].to_numpy(dtype=float), side='right')
        types[name] = ordinal(w)
    return Dataset(frame, types, validate=False)


def scheme_dataset(scheme, n, N, rng):
    """
    One replicate of a scheme: (SimulatedSem, Dataset, SemSpec).

    The returned SemSpec carries the column types of the (possibly
    discretized) data.
    """
    sem = random_sem(n, scheme.indicator_range, rng)
    d = simulate(sem.measurement, sem.params, N, rng)
    if scheme.indicator_type == IndicatorType.ORDINAL:
        d = discretize(d, rng)
    measurement = sem.measurement.with_column_types(d.column_types)
    return sem._replace(measurement=measurement), d, SemSpec.from_specs(measurement)
