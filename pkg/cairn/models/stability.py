#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Stability selection over subsamples.

The search is run on many subsamples. Every subset contributes, per
complexity level, its best model converted to a CPDAG; the resulting bag
gives the selection probability of an edge (any orientation) or of a
directed path between two nodes at each complexity level. Structures whose
probability reaches pi_sel at a complexity no larger than pi_bic (the level
with the lowest median BIC) are reported as relevant.
"""
import itertools
import logging
import math
from collections import OrderedDict, namedtuple
from dataclasses import dataclass, field

import numpy as np

import cairn.model_library.sem.sem_calc as sem_calc
from cairn.common.errors import NoEstimateError, SpecError
from cairn.model_library.defn import EdgeDirection, StabilityKind
from cairn.model_library.graphs.dag import Dag, dag_to_cpdag, directed_reachability, has_edge

logger = logging.getLogger('cairn.models.stability')

BagEntry = namedtuple('BagEntry', ['subset', 'complexity', 'cpdag'])

PiBic = namedtuple('PiBic', ['level', 'medians', 'support', 'underpopulated'])
PiBic.__doc__ = ('level: complexity with the lowest median BIC; medians and support: per level, the median BIC '
                 'and the number of contributing subsets; underpopulated: fewer than half the subsets contribute')

RelevantStructure = namedtuple('RelevantStructure', ['pair', 'kind', 'reliability', 'direction', 'edge_reliability'])

EDGE_SEPARATOR = ' -- '
PATH_SEPARATOR = ' -> '


def subsample_indices(n_rows, count, rng, fraction=0.5):
    """``count`` sorted row-index arrays of floor(fraction * n_rows) rows, drawn without replacement."""
    if n_rows < 10:
        raise SpecError('Subsampling needs at least 10 rows, got {}'.format(n_rows))
    if not 0. < fraction <= 1.:
        raise SpecError('Subsample fraction must lie in (0, 1], got {}'.format(fraction))
    size = int(math.floor(fraction * n_rows))
    return [np.sort(rng.choice(n_rows, size=size, replace=False)) for _ in range(count)]


def subsample(d, count, rng, fraction=0.5):
    """
    Draw ``count`` independent subsets of a dataset.

    Parameters
    ----------
    d : Dataset
    count : int
        Number of subsets S.
    rng : numpy.random.Generator
    fraction : float (optional)
        Share of the rows in each subset; 0.5 by default.

    Returns
    -------
        list of Dataset
    """
    return [d.take(rows) for rows in subsample_indices(d.n_rows, count, rng, fraction)]


def accumulate(fronts):
    """
    Bag of (subset, complexity, CPDAG) entries: one per occupied complexity
    level of every subset's front, from its best model at that level.
    """
    bag = []
    for subset, front in enumerate(fronts):
        if front is None:
            continue
        for c, member in front.best_by_complexity.items():
            cpdag = dag_to_cpdag(Dag.from_adjacency(member.structure.adjacency))
            bag.append(BagEntry(subset, c, cpdag))
    return bag


@dataclass(frozen=True, eq=False)
class StabilityGraph:
    """
    Selection probabilities per (pair, complexity level). Pairs are index
    tuples: unordered (a < b) for edges, ordered for causal paths. Levels
    without models are absent from ``values`` and ``counts``.
    """
    kind: StabilityKind
    node_names: tuple
    values: dict
    counts: dict = field(default_factory=dict)

    @property
    def levels(self):
        return sorted(self.counts)

    def pairs(self):
        n = len(self.node_names)
        if self.kind == StabilityKind.EDGE:
            return list(itertools.combinations(range(n), 2))
        return list(itertools.permutations(range(n), 2))

    def probability(self, pair, level):
        """Selection probability, or None at an absent level."""
        if self.kind == StabilityKind.EDGE:
            pair = (min(pair), max(pair))
        return self.values.get((tuple(pair), level))

    def max_probability(self, pair, max_level=None):
        """Largest probability over the occupied levels <= max_level (0 if none)."""
        levels = [c for c in self.levels if max_level is None or c <= max_level]
        probs = [self.probability(pair, c) for c in levels]
        return max(probs) if probs else 0.

    def pair_label(self, pair):
        sep = EDGE_SEPARATOR if self.kind == StabilityKind.EDGE else PATH_SEPARATOR
        return sep.join(self.node_names[k] for k in pair)

    def to_rows(self):
        """Long-format rows (pair, kind, complexity, probability, n_models)."""
        rows = []
        for pair in self.pairs():
            for c in self.levels:
                rows.append(OrderedDict([('pair', self.pair_label(pair)), ('kind', self.kind.value),
                                         ('complexity', c), ('probability', self.values[(pair, c)]),
                                         ('n_models', self.counts[c])]))
        return rows

    def to_dict(self):
        return OrderedDict([
            ('kind', self.kind.value),
            ('nodes', list(self.node_names)),
            ('counts', OrderedDict((str(c), self.counts[c]) for c in self.levels)),
            ('probabilities', OrderedDict((self.pair_label(pair), [self.values[(pair, c)] for c in self.levels])
                                          for pair in self.pairs())),
        ])

    @classmethod
    def from_rows(cls, rows, kind, node_names):
        """Inverse of :py:meth:`to_rows` for rows of the given kind (other rows are skipped)."""
        index = {name: k for k, name in enumerate(node_names)}
        sep = EDGE_SEPARATOR if kind == StabilityKind.EDGE else PATH_SEPARATOR
        values, counts = dict(), dict()
        for row in rows:
            if row['kind'] != kind.value:
                continue
            names = str(row['pair']).split(sep)
            if len(names) != 2 or names[0] not in index or names[1] not in index:
                raise SpecError('Stability row refers to an unknown pair {}'.format(row['pair']))
            pair = (index[names[0]], index[names[1]])
            if kind == StabilityKind.EDGE:
                pair = (min(pair), max(pair))
            c = int(row['complexity'])
            values[(pair, c)] = float(row['probability'])
            counts[c] = int(row['n_models'])
        return cls(kind, tuple(node_names), values, counts)


def _levels(bag):
    by_level = OrderedDict()
    for entry in sorted(bag, key=lambda e: (e.complexity, e.subset)):
        by_level.setdefault(entry.complexity, []).append(entry.cpdag)
    return by_level


def _names(bag, node_names):
    if node_names is not None:
        return tuple(node_names)
    return tuple(str(k) for k in range(bag[0].cpdag.n))


def edge_stability(bag, node_names=None):
    """Fraction of the models at each level with an edge (any orientation) between each pair."""
    if not bag:
        raise ValueError('Stability needs a nonempty bag of models')
    names = _names(bag, node_names)
    values, counts = dict(), dict()
    for c, cpdags in _levels(bag).items():
        counts[c] = len(cpdags)
        for a, b in itertools.combinations(range(len(names)), 2):
            values[((a, b), c)] = sum(has_edge(g, a, b) for g in cpdags) / len(cpdags)
    return StabilityGraph(StabilityKind.EDGE, names, values, counts)


def causal_path_stability(bag, node_names=None):
    """Fraction of the models at each level with a directed path from a to b, per ordered pair."""
    if not bag:
        raise ValueError('Stability needs a nonempty bag of models')
    names = _names(bag, node_names)
    n = len(names)
    values, counts = dict(), dict()
    for c, cpdags in _levels(bag).items():
        counts[c] = len(cpdags)
        total = np.zeros((n, n))
        for g in cpdags:
            total += directed_reachability(g)
        for a, b in itertools.permutations(range(n), 2):
            values[((a, b), c)] = total[a, b] / len(cpdags)
    return StabilityGraph(StabilityKind.CAUSAL_PATH, names, values, counts)


def pi_bic(fronts, N=None):
    """
    Complexity level with the lowest median BIC across subsets.

    Parameters
    ----------
    fronts : list of ParetoFront
        One per subset (None for failed subsets).
    N : int (optional)
        Subset sample size; when given the BIC is recomputed from each member's
        chi-square and free-parameter count, otherwise the fitted BIC is used.

    Returns
    -------
        PiBic
    """
    scores = OrderedDict()
    fronts = [f for f in fronts if f is not None]
    for front in fronts:
        for c, member in front.best_by_complexity.items():
            value = sem_calc.bic(member.chi_square, member.t, N) if N is not None else member.fit.bic
            scores.setdefault(c, []).append(value)
    if not scores:
        raise NoEstimateError('No complexity level has a fitted model')
    levels = sorted(scores)
    medians = OrderedDict((c, float(np.median(scores[c]))) for c in levels)
    support = OrderedDict((c, len(scores[c])) for c in levels)
    best = min(levels, key=lambda c: (medians[c], c))
    underpopulated = support[best] < math.ceil(len(fronts) / 2.)
    if underpopulated:
        logger.warning('Only {} of {} subsets have a model at complexity {}'.format(
            support[best], len(fronts), best))
    return PiBic(best, medians, support, underpopulated)


def relevant_structures(edge_g, path_g, pi_sel=0.6, pi_bic=None):
    """
    Structures in the relevant region: probability >= pi_sel at some level <= pi_bic.

    A relevant causal path is reported as a directed relation; a relevant
    edge with no relevant causal path in either direction is reported
    undirected. Reliability is the largest probability in the region.

    Parameters
    ----------
    edge_g : StabilityGraph
    path_g : StabilityGraph
    pi_sel : float
        Selection threshold in (0, 1].
    pi_bic : int or PiBic (optional)
        Complexity threshold; all levels when None.

    Returns
    -------
        list of RelevantStructure
    """
    if not 0. < pi_sel <= 1.:
        raise SpecError('pi_sel must lie in (0, 1], got {}'.format(pi_sel))
    if isinstance(pi_bic, PiBic):
        pi_bic = pi_bic.level
    names = edge_g.node_names

    directed = []
    for pair in path_g.pairs():
        reliability = path_g.max_probability(pair, pi_bic)
        if reliability >= pi_sel:
            directed.append(RelevantStructure((names[pair[0]], names[pair[1]]), StabilityKind.CAUSAL_PATH,
                                              reliability, EdgeDirection.DIRECTED,
                                              edge_g.max_probability(pair, pi_bic)))
    oriented = {frozenset(s.pair) for s in directed}

    undirected = []
    for pair in edge_g.pairs():
        reliability = edge_g.max_probability(pair, pi_bic)
        named = (names[pair[0]], names[pair[1]])
        if reliability >= pi_sel and frozenset(named) not in oriented:
            undirected.append(RelevantStructure(named, StabilityKind.EDGE, reliability, EdgeDirection.UNDIRECTED,
                                                reliability))

    def _order(s):
        return (-s.reliability, s.pair)

    return sorted(directed, key=_order) + sorted(undirected, key=_order)
