#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Multi-objective evolutionary search over structural models.

Individuals are binary genomes over all ordered node pairs (i, j), i != j,
in row-major order; gene (i, j) set means the relation i -> j. Both
objectives, the chi-square of the ML fit and the number of relations, are
minimized with a nondominated sort and crowding distance (NSGA-II).
Crossover and mutation work on raw genomes; :py:func:`evolve` repairs every
child before it is fitted.
"""
import logging
from collections import OrderedDict, namedtuple
from dataclasses import dataclass

import networkx as nx
import numpy as np
from joblib import Parallel, delayed

from cairn.common.errors import DegenerateModelError, NumericDomainError, SpecError
from cairn.model_library.defn import ExogenousCovariance, NONCONVERGED_CHI_SQUARE
from cairn.model_library.sem.sem_calc import complexity
from cairn.model_library.sem.structure import StructuralSpec
from cairn.models.estimator import FitCache, FitOptions, fit_structure

logger = logging.getLogger('cairn.models.search')


@dataclass(frozen=True)
class SearchParams:
    population: int = 50
    iterations: int = 30
    crossover: float = 0.45
    mutation: float = 0.01
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.population < 2 or self.population % 2:
            raise SpecError('Population size must be even and at least 2, got {}'.format(self.population))
        if self.iterations < 0:
            raise SpecError('Number of iterations must be nonnegative, got {}'.format(self.iterations))
        for name in ('crossover', 'mutation'):
            value = getattr(self, name)
            if not 0. <= value <= 1.:
                raise SpecError('{} probability must lie in [0, 1], got {}'.format(name.capitalize(), value))

    def to_dict(self):
        return OrderedDict([('population', self.population), ('iterations', self.iterations),
                            ('crossover', self.crossover), ('mutation', self.mutation), ('seed', self.seed)])


@dataclass
class Individual:
    genome: np.ndarray
    fitness: tuple = None
    rank: int = 0
    crowding: float = 0.
    fit: object = None

    def __post_init__(self):
        self.genome = np.array(self.genome, dtype=np.int8)

    def copy(self):
        return Individual(self.genome)


FrontMember = namedtuple('FrontMember', ['chi_square', 't', 'complexity', 'structure', 'fit'])


@dataclass(frozen=True, eq=False)
class ParetoFront:
    """
    nondominated: members not dominated by any other model found;
    best_by_complexity: complexity -> lowest chi-square member seen.
    """
    nondominated: tuple
    best_by_complexity: OrderedDict

    def complexities(self):
        return list(self.best_by_complexity)


def n_nodes_of(genome_length):
    """n such that n(n - 1) == genome_length."""
    n = int(round((1 + np.sqrt(1 + 4 * genome_length)) / 2))
    if n * (n - 1) != genome_length:
        raise ValueError('Genome length {} is not n(n - 1)'.format(genome_length))
    return n


def _off_diagonal(n):
    return ~np.eye(n, dtype=bool)


def decode(genome, n=None):
    """Adjacency matrix of a genome."""
    genome = np.asarray(genome)
    n = n_nodes_of(len(genome)) if n is None else n
    adj = np.zeros((n, n), dtype=np.int8)
    adj[_off_diagonal(n)] = genome
    return adj


def encode(adjacency):
    adj = np.asarray(adjacency)
    return adj[_off_diagonal(adj.shape[0])].astype(np.int8)


def dominates(a, b):
    """a dominates b when it is no worse on every objective and better on one (minimization)."""
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def fast_nondominated_sort(fitnesses):
    """
    Partition a population into nondomination fronts.

    Parameters
    ----------
    fitnesses : sequence of tuple
        Objective vectors, all minimized.

    Returns
    -------
        list of list of int : indices of the members of F1, F2, ...
    """
    n = len(fitnesses)
    dominated = [[] for _ in range(n)]
    count = np.zeros(n, dtype=int)
    fronts = [[]]
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            if dominates(fitnesses[p], fitnesses[q]):
                dominated[p].append(q)
            elif dominates(fitnesses[q], fitnesses[p]):
                count[p] += 1
        if count[p] == 0:
            fronts[0].append(p)
    i = 0
    while fronts[i]:
        nxt = []
        for p in fronts[i]:
            for q in dominated[p]:
                count[q] -= 1
                if count[q] == 0:
                    nxt.append(q)
        i += 1
        fronts.append(sorted(nxt))
    return fronts[:-1]


def crowding_distance(fitnesses):
    """
    Crowding distance of the members of one front: boundary members get
    +inf, interior members the sum over objectives of the normalized gap
    between their neighbours.
    """
    values = np.asarray(fitnesses, dtype=float)
    size = len(values)
    distance = np.zeros(size)
    if size <= 2:
        distance[:] = np.inf
        return distance
    for k in range(values.shape[1]):
        order = np.argsort(values[:, k], kind='stable')
        low, high = values[order[0], k], values[order[-1], k]
        distance[order[0]] = distance[order[-1]] = np.inf
        if high == low:
            continue
        gaps = (values[order[2:], k] - values[order[:-2], k]) / (high - low)
        distance[order[1:-1]] += gaps
    return distance


def crossover(a, b, C, rng):
    """With probability C, swap each gene between the parents with probability 1/2; else clone."""
    c1, c2 = a.copy(), b.copy()
    if rng.random() < C:
        swap = rng.random(len(a.genome)) < 0.5
        c1.genome[swap] = b.genome[swap]
        c2.genome[swap] = a.genome[swap]
    return c1, c2


def mutate(ind, M, rng):
    """Flip every gene independently with probability M."""
    child = ind.copy()
    flip = rng.random(len(child.genome)) < M
    child.genome[flip] = 1 - child.genome[flip]
    return child


def repair(ind, prior, rng):
    """
    Make a genome admissible: drop relations the prior knowledge forbids,
    set the required ones, then delete a uniformly chosen non-required
    relation of a detected cycle until the structure is acyclic.
    """
    n = n_nodes_of(len(ind.genome))
    adj = decode(ind.genome, n)
    if prior is not None:
        for i, j in prior.forbidden_edges:
            adj[i, j] = 0
        for j in prior.exogenous_only:
            adj[:, j] = 0
        for i, j in prior.required_edges:
            adj[i, j] = 1
        required = prior.required_edges
    else:
        required = frozenset()

    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(zip(*np.nonzero(adj)))
    while True:
        try:
            cycle = nx.find_cycle(g)
        except nx.NetworkXNoCycle:
            break
        candidates = [(int(a), int(b)) for a, b in cycle if (int(a), int(b)) not in required]
        a, b = candidates[int(rng.integers(len(candidates)))]
        g.remove_edge(a, b)
        adj[a, b] = 0
    return Individual(encode(adj))


def _tournament(population, rng):
    i, j = rng.choice(len(population), size=2, replace=False)
    a, b = population[i], population[j]
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    return a if a.crowding >= b.crowding else b


def _assign_rank_and_crowding(population):
    fronts = fast_nondominated_sort([ind.fitness for ind in population])
    for rank, front in enumerate(fronts):
        distance = crowding_distance([population[k].fitness for k in front])
        for k, d in zip(front, distance):
            population[k].rank = rank
            population[k].crowding = d
    return fronts


def _select(combined, size):
    """Elitist environmental selection by front, then by crowding distance."""
    fronts = _assign_rank_and_crowding(combined)
    survivors = []
    for front in fronts:
        if len(survivors) + len(front) <= size:
            survivors.extend(combined[k] for k in front)
        else:
            ordered = sorted(front, key=lambda k: -combined[k].crowding)
            survivors.extend(combined[k] for k in ordered[:size - len(survivors)])
        if len(survivors) == size:
            break
    return survivors


class _Evaluator(object):
    def __init__(self, measurement, identification, S, N, options, exogenous_covariances, cache,
                 subset_index, n_jobs):
        self.measurement = measurement
        self.identification = identification
        self.S = S
        self.N = N
        self.options = options
        self.exogenous_covariances = exogenous_covariances
        self.cache = cache
        self.subset_index = subset_index
        self.n_jobs = n_jobs

    def _fit(self, structural):
        try:
            return fit_structure(self.measurement, structural, self.identification, self.S, self.N,
                                 self.options, self.exogenous_covariances, self.cache, self.subset_index)
        except (NumericDomainError, DegenerateModelError) as e:
            return e

    def __call__(self, individuals):
        structures = OrderedDict()
        keys = []
        for ind in individuals:
            structural = StructuralSpec(self.measurement.node_names, decode(ind.genome),
                                        self.measurement.node_roles)
            keys.append(structural.digest())
            structures.setdefault(keys[-1], structural)
        todo = [s for s in structures.values() if (s.digest(), self.subset_index) not in self.cache]
        if self.n_jobs != 1 and len(todo) > 1:
            Parallel(n_jobs=self.n_jobs, prefer='threads')(delayed(self._fit)(s) for s in todo)
        failures = []
        for ind, key in zip(individuals, keys):
            structural = structures[key]
            result = self._fit(structural)
            c = complexity(structural)
            if isinstance(result, Exception):
                failures.append(result)
                ind.fit = None
                ind.fitness = (NONCONVERGED_CHI_SQUARE, c)
            else:
                ind.fit = result
                ind.fitness = (result.chi_square if result.converged else NONCONVERGED_CHI_SQUARE, c)
        if individuals and len(failures) == len(individuals):
            raise failures[-1]
        return individuals


def _update_archive(archive, individuals, node_names, roles):
    for ind in individuals:
        if ind.fit is None or not ind.fit.converged:
            continue
        chi2, c = ind.fitness
        if c not in archive or chi2 < archive[c].chi_square:
            archive[c] = FrontMember(chi2, ind.fit.t, c, StructuralSpec(node_names, decode(ind.genome), roles),
                                     ind.fit)


def evolve(S, N, measurement, identification, prior, params, options=None,
           exogenous_covariances=ExogenousCovariance.FREE, cache=None, subset_index=0):
    """
    Search for structural models that trade off fit against complexity.

    Parameters
    ----------
    S : numpy.ndarray
        Positive definite sample matrix in canonical indicator order.
    N : int
        Sample size.
    measurement : MeasurementSpec
    identification : Identification
        Markers and zero-error indicators (see :py:func:`identify_measurement`).
    prior : PriorKnowledge
        Constraints every visited structure satisfies, including the
        relations required for identification.
    params : SearchParams
    options : FitOptions (optional)
    exogenous_covariances : ExogenousCovariance (optional)
    cache : FitCache (optional)
        A fresh cache is used if not given.
    subset_index : int (optional)
        Part of the cache key.

    Returns
    -------
        ParetoFront
    """
    rng = np.random.default_rng(params.seed)
    n = measurement.n_nodes
    node_names, roles = measurement.node_names, measurement.node_roles
    cache = FitCache() if cache is None else cache
    evaluate = _Evaluator(measurement, identification, S, N, options or FitOptions(), exogenous_covariances,
                          cache, subset_index, params.n_jobs)

    length = n * (n - 1)
    density = min(2. / (n - 1), 1.) if n > 1 else 0.
    population = [repair(Individual((rng.random(length) < density).astype(np.int8)), prior, rng)
                  for _ in range(params.population)]
    evaluate(population)
    archive = dict()
    _update_archive(archive, population, node_names, roles)
    _assign_rank_and_crowding(population)

    for generation in range(params.iterations):
        offspring = []
        while len(offspring) < params.population:
            a = _tournament(population, rng)
            b = _tournament(population, rng)
            for child in crossover(a, b, params.crossover, rng):
                offspring.append(repair(mutate(child, params.mutation, rng), prior, rng))
        evaluate(offspring)
        _update_archive(archive, offspring, node_names, roles)
        population = _select(population + offspring, params.population)
        logger.debug('Generation {}: {} archived complexity levels, cache size {}'.format(
            generation + 1, len(archive), len(cache)))

    best = OrderedDict((c, archive[c]) for c in sorted(archive))
    members = list(best.values())
    fronts = fast_nondominated_sort([(m.chi_square, m.complexity) for m in members])
    nondominated = tuple(members[k] for k in sorted(fronts[0])) if fronts else ()
    return ParetoFront(nondominated, best)
