#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
ROC evaluation of stability graphs against the CPDAG of a known model.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.metrics import auc, roc_curve

from cairn.common.errors import NoEstimateError, SpecError
from cairn.model_library.defn import StabilityKind
from cairn.model_library.graphs.dag import has_directed_path, has_edge

logger = logging.getLogger('cairn.models.evaluation')


@dataclass(frozen=True)
class RocResult:
    kind: StabilityKind
    points: tuple
    auc: float
    n_positive: int = 0
    n_negative: int = 0

    def to_dict(self):
        return OrderedDict([('kind', self.kind.value), ('auc', self.auc),
                            ('n_positive', self.n_positive), ('n_negative', self.n_negative),
                            ('fpr', [p[0] for p in self.points]), ('tpr', [p[1] for p in self.points])])


def pair_scores(stability, max_complexity=None):
    """Largest selection probability of every pair over the levels <= max_complexity."""
    return OrderedDict((pair, stability.max_probability(pair, max_complexity)) for pair in stability.pairs())


def true_pairs(stability, truth):
    """Pairs of ``stability`` that are adjacent (edges) or causally connected (paths) in ``truth``."""
    if truth.n != len(stability.node_names):
        raise SpecError('Truth has {} nodes, the stability graph {}'.format(truth.n, len(stability.node_names)))
    if stability.kind == StabilityKind.EDGE:
        return {pair for pair in stability.pairs() if has_edge(truth, *pair)}
    return {pair for pair in stability.pairs() if has_directed_path(truth, *pair)}


def roc_auc(stability, truth, max_complexity=None):
    """
    ROC curve of the pair scores while the stability threshold decreases.

    Parameters
    ----------
    stability : StabilityGraph
    truth : Cpdag
        CPDAG of the true model over the same nodes.
    max_complexity : int (optional)
        Only levels up to this complexity contribute to a pair's score.

    Returns
    -------
        RocResult

    Raises
    ------
        NoEstimateError
            If the truth has no positive or no negative pairs.
    """
    scores = pair_scores(stability, max_complexity)
    positives = true_pairs(stability, truth)
    labels = np.array([pair in positives for pair in scores], dtype=int)
    n_positive = int(labels.sum())
    n_negative = len(labels) - n_positive
    if n_positive == 0 or n_negative == 0:
        raise NoEstimateError('ROC needs positive and negative pairs ({} positive, {} negative)'.format(
            n_positive, n_negative))
    fpr, tpr, _ = roc_curve(labels, np.array(list(scores.values())), drop_intermediate=False)
    points = tuple((float(f), float(t)) for f, t in zip(fpr, tpr))
    return RocResult(stability.kind, points, float(auc(fpr, tpr)), n_positive, n_negative)


def mean_auc_table(rows):
    """
    Mean AUC with its standard error per (scheme, kind, N).

    Parameters
    ----------
    rows : iterable of dict
        With keys 'scheme', 'kind', 'N' and 'auc' (one per replicate).

    Returns
    -------
        pandas.DataFrame
    """
    frame = pd.DataFrame(list(rows), columns=['scheme', 'kind', 'N', 'auc'])
    table = frame.groupby(['scheme', 'kind', 'N'], sort=True)['auc'].agg(['mean', 'sem', 'count'])
    return table.reset_index().rename(columns={'mean': 'mean_auc', 'sem': 'se', 'count': 'replicates'})
