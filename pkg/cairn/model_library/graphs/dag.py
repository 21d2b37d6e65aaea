#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
DAG and CPDAG machinery.

Nodes are dense integer indices 0..n-1; names are attached only at the
boundary (JSON serialization). A :py:class:`Cpdag` stores directed edges as
ordered pairs and undirected edges as pairs (a, b) with a < b, so two
CPDAGs of the same equivalence class compare (and hash) equal, which is
what the stability computations count on.
"""
import itertools
from dataclasses import dataclass

import networkx as nx
import numpy as np

from cairn.common.errors import SpecError


def _digraph(adjacency):
    adj = np.asarray(adjacency)
    g = nx.DiGraph()
    g.add_nodes_from(range(adj.shape[0]))
    g.add_edges_from(zip(*np.nonzero(adj)))
    return g


def is_acyclic(adjacency):
    """True iff the square 0/1 matrix has no directed cycle (self-loops count as cycles)."""
    return nx.is_directed_acyclic_graph(_digraph(adjacency))


@dataclass(frozen=True)
class Dag:
    n: int
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, 'edges', frozenset((int(a), int(b)) for a, b in self.edges))
        for a, b in self.edges:
            if a == b or not (0 <= a < self.n and 0 <= b < self.n):
                raise SpecError('Invalid DAG edge ({}, {})'.format(a, b))
        if not is_acyclic(self.adjacency):
            raise SpecError('Edge set contains a directed cycle')

    @classmethod
    def from_adjacency(cls, adjacency):
        adj = np.asarray(adjacency)
        return cls(adj.shape[0], frozenset(zip(*np.nonzero(adj))))

    @property
    def adjacency(self):
        adj = np.zeros((self.n, self.n), dtype=np.int8)
        for a, b in self.edges:
            adj[a, b] = 1
        return adj

    def parents(self, node):
        return sorted(a for a, b in self.edges if b == node)


@dataclass(frozen=True)
class Cpdag:
    n: int
    directed_edges: frozenset
    undirected_edges: frozenset

    def __post_init__(self):
        directed = frozenset((int(a), int(b)) for a, b in self.directed_edges)
        undirected = frozenset((min(int(a), int(b)), max(int(a), int(b))) for a, b in self.undirected_edges)
        for a, b in directed:
            if (min(a, b), max(a, b)) in undirected or (b, a) in directed:
                raise SpecError('Pair ({}, {}) appears in more than one edge set'.format(a, b))
        object.__setattr__(self, 'directed_edges', directed)
        object.__setattr__(self, 'undirected_edges', undirected)

    @property
    def skeleton(self):
        return frozenset((min(a, b), max(a, b)) for a, b in self.directed_edges) | self.undirected_edges

    def n_edges(self):
        return len(self.directed_edges) + len(self.undirected_edges)

    def directed_parents(self, node):
        return sorted(a for a, b in self.directed_edges if b == node)

    def undirected_neighbors(self, node):
        return sorted([b for a, b in self.undirected_edges if a == node] +
                      [a for a, b in self.undirected_edges if b == node])

    def adjacent(self, a, b):
        return has_edge(self, a, b)

    def to_json(self, names):
        return {'directed': sorted([names[a], names[b]] for a, b in self.directed_edges),
                'undirected': sorted([names[a], names[b]] for a, b in self.undirected_edges),
                }

    @classmethod
    def from_json(cls, doc, names):
        index = {name: i for i, name in enumerate(names)}
        try:
            directed = [(index[a], index[b]) for a, b in doc.get('directed', [])]
            undirected = [(index[a], index[b]) for a, b in doc.get('undirected', [])]
        except KeyError as e:
            raise SpecError('CPDAG refers to unknown node {}'.format(e))
        return cls(len(names), frozenset(directed), frozenset(undirected))


def _pdag_matrix(n, directed, undirected):
    m = np.zeros((n, n), dtype=bool)
    for a, b in directed:
        m[a, b] = True
    for a, b in undirected:
        m[a, b] = m[b, a] = True
    return m


def _apply_meek_rules(m):
    """
    Close a PDAG (boolean matrix, m[a,b] and m[b,a] both True for a-b)
    under Meek's four orientation rules. Modifies m in place.
    """
    n = m.shape[0]

    def undirected(a, b):
        return m[a, b] and m[b, a]

    def directed(a, b):
        return m[a, b] and not m[b, a]

    def adjacent(a, b):
        return m[a, b] or m[b, a]

    changed = True
    while changed:
        changed = False
        for a, b in itertools.permutations(range(n), 2):
            if not undirected(a, b):
                continue
            orient = False
            # R1: c -> a - b, c and b nonadjacent
            if any(directed(c, a) and not adjacent(c, b) for c in range(n) if c != b):
                orient = True
            # R2: a -> c -> b
            elif any(directed(a, c) and directed(c, b) for c in range(n)):
                orient = True
            else:
                # R3: a - c -> b, a - d -> b, c and d nonadjacent
                kites = [c for c in range(n) if undirected(a, c) and directed(c, b)]
                if any(not adjacent(c, d) for c, d in itertools.combinations(kites, 2)):
                    orient = True
                else:
                    # R4: a - c -> d -> b, a adjacent to d, c and b nonadjacent
                    for c in range(n):
                        if not undirected(a, c) or adjacent(c, b):
                            continue
                        if any(directed(c, d) and directed(d, b) and adjacent(a, d) for d in range(n)):
                            orient = True
                            break
            if orient:
                m[b, a] = False
                changed = True
    return m


def dag_to_cpdag(g):
    """
    Completed pattern of the Markov equivalence class of ``g``: the skeleton,
    the v-structures oriented, closed under the Meek rules.
    """
    adj = g.adjacency.astype(bool)
    n = g.n
    compelled = set()
    for b in range(n):
        parents = np.flatnonzero(adj[:, b])
        for a, c in itertools.combinations(parents, 2):
            if not (adj[a, c] or adj[c, a]):
                compelled.add((int(a), b))
                compelled.add((int(c), b))
    undirected = [(a, b) for a, b in g.edges if (a, b) not in compelled]
    m = _apply_meek_rules(_pdag_matrix(n, compelled, undirected))
    directed_edges = set()
    undirected_edges = set()
    for a, b in zip(*np.nonzero(m)):
        if m[b, a]:
            if a < b:
                undirected_edges.add((int(a), int(b)))
        else:
            directed_edges.add((int(a), int(b)))
    return Cpdag(n, frozenset(directed_edges), frozenset(undirected_edges))


def has_edge(c, a, b):
    """Adjacency in either orientation, or undirected."""
    if a == b:
        return False
    return ((a, b) in c.directed_edges or (b, a) in c.directed_edges or
            (min(a, b), max(a, b)) in c.undirected_edges)


def _directed_graph(c):
    g = nx.DiGraph()
    g.add_nodes_from(range(c.n))
    g.add_edges_from(c.directed_edges)
    return g


def has_directed_path(c, a, b):
    """True iff b is reachable from a along directed edges only (paths have length >= 1)."""
    if a == b:
        return False
    return nx.has_path(_directed_graph(c), a, b)


def directed_reachability(c):
    """Boolean matrix r with r[a, b] = has_directed_path(c, a, b) for all pairs."""
    g = _directed_graph(c)
    r = np.zeros((c.n, c.n), dtype=bool)
    for a in range(c.n):
        for b in nx.descendants(g, a):
            r[a, b] = True
    return r


def random_dag(n, s, rng):
    """
    Draw a uniform node ordering and include every forward pair with
    probability ``s``.
    """
    if n < 2:
        raise SpecError('random_dag needs n >= 2, got {}'.format(n))
    if not 0.0 <= s <= 1.0:
        raise SpecError('Edge probability must lie in [0, 1], got {}'.format(s))
    order = rng.permutation(n)
    pairs = [(order[i], order[j]) for i, j in itertools.combinations(range(n), 2)]
    keep = rng.random(len(pairs)) < s
    return Dag(n, frozenset((int(a), int(b)) for (a, b), k in zip(pairs, keep) if k))


def enumerate_dags(n):
    """All labelled DAGs on n nodes (1, 1, 3, 25, 543, ... for n = 0, 1, 2, 3, 4)."""
    pairs = list(itertools.combinations(range(n), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = set()
        for (a, b), s in zip(pairs, states):
            if s == 1:
                edges.add((a, b))
            elif s == 2:
                edges.add((b, a))
        adj = np.zeros((n, n), dtype=np.int8)
        for a, b in edges:
            adj[a, b] = 1
        if is_acyclic(adj):
            yield Dag(n, frozenset(edges))


def dag_extensions(c):
    """All DAGs whose completed pattern is ``c`` (exhaustive; meant for small graphs)."""
    undirected = sorted(c.undirected_edges)
    for flips in itertools.product((False, True), repeat=len(undirected)):
        edges = set(c.directed_edges)
        for (a, b), flip in zip(undirected, flips):
            edges.add((b, a) if flip else (a, b))
        adj = np.zeros((c.n, c.n), dtype=np.int8)
        for a, b in edges:
            adj[a, b] = 1
        if not is_acyclic(adj):
            continue
        dag = Dag(c.n, frozenset(edges))
        if dag_to_cpdag(dag) == c:
            yield dag
