#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Specification types for structural equation models with latent variables.

A model is described by three pieces:

* :py:class:`MeasurementSpec` - which indicator loads on which latent
  (a pure measurement model) and how every observed column is typed,
* :py:class:`StructuralSpec` - the directed relations among the structural
  nodes (latents first, then covariates) as a binary adjacency matrix in
  which entry (i, j) = 1 means i -> j,
* :py:class:`PriorKnowledge` - constraints any structure must satisfy.

Covariates (e.g., gender, age) are modelled as exogenous single-indicator
nodes: their own column is the indicator, with loading 1 and error 0.
"""
from collections import namedtuple, OrderedDict
from dataclasses import dataclass, field

import numpy as np

from cairn.common.errors import SpecError
from cairn.model_library.defn import IndicatorType, NodeRole, MIN_CATEGORIES, MAX_CATEGORIES

ColumnType = namedtuple('ColumnType', ['kind', 'categories'])
ColumnType.__doc__ = 'Type of an observed column: kind is an IndicatorType, categories is w for ordinal columns'

CONTINUOUS = ColumnType(IndicatorType.CONTINUOUS, None)


def ordinal(categories):
    return ColumnType(IndicatorType.ORDINAL, int(categories))


def _check_column_type(name, ctype):
    if ctype.kind == IndicatorType.ORDINAL:
        if ctype.categories is None or not (MIN_CATEGORIES <= ctype.categories <= MAX_CATEGORIES):
            raise SpecError('Ordinal column {} must declare between {} and {} categories, got {}'.format(
                name, MIN_CATEGORIES, MAX_CATEGORIES, ctype.categories))
    elif ctype.kind != IndicatorType.CONTINUOUS:
        raise SpecError('Unknown column type {} for {}'.format(ctype.kind, name))


@dataclass(frozen=True)
class MeasurementSpec:
    latent_names: tuple
    indicator_map: OrderedDict
    indicator_types: dict
    covariate_names: tuple = ()
    covariate_types: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'latent_names', tuple(self.latent_names))
        object.__setattr__(self, 'covariate_names', tuple(self.covariate_names))
        object.__setattr__(self, 'indicator_map', OrderedDict(self.indicator_map))
        self.validate()

    def validate(self):
        if len(self.latent_names) + len(self.covariate_names) == 0:
            raise SpecError('A model needs at least one latent variable or covariate')
        names = list(self.latent_names) + list(self.covariate_names) + list(self.indicator_map)
        seen = set()
        for name in names:
            if name in seen:
                raise SpecError('Name {} is used more than once in the model specification'.format(name))
            seen.add(name)
        for indicator, latent in self.indicator_map.items():
            if latent not in self.latent_names:
                raise SpecError('Indicator {} loads on unknown latent {}'.format(indicator, latent))
            if indicator not in self.indicator_types:
                raise SpecError('Indicator {} has no declared type'.format(indicator))
            _check_column_type(indicator, self.indicator_types[indicator])
        for latent in self.latent_names:
            if not self.indicators_of(latent):
                raise SpecError('Latent {} has no indicators'.format(latent))
        for cov in self.covariate_names:
            _check_column_type(cov, self.covariate_types.get(cov, CONTINUOUS))

    @property
    def node_names(self):
        return self.latent_names + self.covariate_names

    @property
    def n_nodes(self):
        return len(self.latent_names) + len(self.covariate_names)

    @property
    def node_roles(self):
        return (NodeRole.LATENT,) * len(self.latent_names) + (NodeRole.COVARIATE,) * len(self.covariate_names)

    def indicators_of(self, node):
        if node in self.covariate_names:
            return [node]
        return [ind for ind, lat in self.indicator_map.items() if lat == node]

    @property
    def indicator_names(self):
        """Canonical observed-column order: latents' indicators in spec order, then covariates."""
        names = []
        for latent in self.latent_names:
            names.extend(self.indicators_of(latent))
        names.extend(self.covariate_names)
        return tuple(names)

    @property
    def n_indicators(self):
        return len(self.indicator_map) + len(self.covariate_names)

    @property
    def column_types(self):
        types = OrderedDict()
        for name in self.indicator_names:
            if name in self.covariate_names:
                types[name] = self.covariate_types.get(name, CONTINUOUS)
            else:
                types[name] = self.indicator_types[name]
        return types

    def node_indicator_indices(self):
        """For every structural node, the canonical indices of its indicators."""
        position = {name: i for i, name in enumerate(self.indicator_names)}
        return [[position[ind] for ind in self.indicators_of(node)] for node in self.node_names]

    def with_column_types(self, types):
        """Copy with updated column types (used after discretizing simulated data)."""
        ind_types = {k: types.get(k, v) for k, v in self.indicator_types.items()}
        cov_types = {k: types.get(k, self.covariate_types.get(k, CONTINUOUS)) for k in self.covariate_names}
        return MeasurementSpec(self.latent_names, self.indicator_map, ind_types,
                               self.covariate_names, cov_types)


@dataclass(frozen=True, eq=False)
class StructuralSpec:
    node_names: tuple
    adjacency: np.ndarray
    node_roles: tuple = None

    def __post_init__(self):
        object.__setattr__(self, 'node_names', tuple(self.node_names))
        adj = np.array(self.adjacency, dtype=np.int8, copy=True)
        n = len(self.node_names)
        if adj.shape != (n, n):
            raise SpecError('Adjacency must be {0}x{0}, got {1}'.format(n, adj.shape))
        if not np.isin(adj, (0, 1)).all():
            raise SpecError('Adjacency must be binary')
        if np.any(np.diag(adj)):
            raise SpecError('Structural model contains a self-loop')
        from cairn.model_library.graphs.dag import is_acyclic
        if not is_acyclic(adj):
            raise SpecError('Structural model contains a directed cycle')
        adj.setflags(write=False)
        object.__setattr__(self, 'adjacency', adj)
        if self.node_roles is None:
            object.__setattr__(self, 'node_roles', (NodeRole.LATENT,) * n)
        else:
            object.__setattr__(self, 'node_roles', tuple(self.node_roles))

    @classmethod
    def empty(cls, measurement):
        n = measurement.n_nodes
        return cls(measurement.node_names, np.zeros((n, n), dtype=np.int8), measurement.node_roles)

    @classmethod
    def from_edges(cls, measurement, edges):
        """Build from a list of (from, to) node-name pairs."""
        index = {name: i for i, name in enumerate(measurement.node_names)}
        n = measurement.n_nodes
        adj = np.zeros((n, n), dtype=np.int8)
        for a, b in edges:
            if a not in index or b not in index:
                raise SpecError('Edge {} -> {} refers to an unknown node'.format(a, b))
            adj[index[a], index[b]] = 1
        return cls(measurement.node_names, adj, measurement.node_roles)

    @property
    def n_nodes(self):
        return len(self.node_names)

    def edges(self):
        return [tuple(e) for e in np.argwhere(self.adjacency)]

    def named_edges(self):
        return [(self.node_names[i], self.node_names[j]) for i, j in self.edges()]

    def parents(self, j):
        return list(np.flatnonzero(self.adjacency[:, j]))

    def with_adjacency(self, adjacency):
        return StructuralSpec(self.node_names, adjacency, self.node_roles)

    def with_edge(self, i, j):
        adj = np.array(self.adjacency)
        adj[i, j] = 1
        return self.with_adjacency(adj)

    def digest(self):
        return np.packbits(self.adjacency.astype(bool)).tobytes()


@dataclass(frozen=True)
class PriorKnowledge:
    node_names: tuple
    forbidden_edges: frozenset = frozenset()
    exogenous_only: frozenset = frozenset()
    required_edges: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'node_names', tuple(self.node_names))
        n = len(self.node_names)
        for i, j in self.forbidden_edges | self.required_edges:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise SpecError('Prior knowledge refers to an invalid edge ({}, {})'.format(i, j))
        for i in self.exogenous_only:
            if not 0 <= i < n:
                raise SpecError('Prior knowledge refers to an invalid node {}'.format(i))
        for i, j in self.required_edges:
            if not self.allows(i, j):
                raise SpecError('Required edge {} -> {} contradicts the prior knowledge'.format(
                    self.node_names[i], self.node_names[j]))
        if self.required_edges:
            from cairn.model_library.graphs.dag import is_acyclic
            adj = np.zeros((n, n), dtype=np.int8)
            for i, j in self.required_edges:
                adj[i, j] = 1
            if not is_acyclic(adj):
                raise SpecError('Required edges form a directed cycle')

    @classmethod
    def from_names(cls, node_names, forbidden=(), exogenous_only=(), required=()):
        index = {name: i for i, name in enumerate(node_names)}

        def _lookup(name):
            if name not in index:
                raise SpecError('Prior knowledge refers to unknown node {}'.format(name))
            return index[name]

        return cls(node_names,
                   frozenset((_lookup(a), _lookup(b)) for a, b in forbidden),
                   frozenset(_lookup(a) for a in exogenous_only),
                   frozenset((_lookup(a), _lookup(b)) for a, b in required))

    @classmethod
    def none(cls, node_names):
        return cls(node_names)

    def allows(self, i, j):
        return (i, j) not in self.forbidden_edges and j not in self.exogenous_only

    def with_required(self, edges):
        return PriorKnowledge(self.node_names, self.forbidden_edges, self.exogenous_only,
                              self.required_edges | frozenset(edges))

    def to_dict(self):
        names = self.node_names
        return {'forbidden': sorted([names[i], names[j]] for i, j in self.forbidden_edges),
                'exogenous': sorted(names[i] for i in self.exogenous_only),
                'required': sorted([names[i], names[j]] for i, j in self.required_edges),
                }
