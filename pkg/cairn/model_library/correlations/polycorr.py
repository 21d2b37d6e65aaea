#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Pearson, polychoric and polyserial correlations and the mixed sample matrix.

Ordinal columns are read as discretizations of standard normal variables.
Estimation is two-step: thresholds come from the marginal proportions, then
the correlation maximizes the likelihood in rho with thresholds held fixed.
"""
import logging
from collections import namedtuple

import numpy as np
import scipy.optimize
import scipy.special
import scipy.stats

from cairn.common.errors import DegenerateColumnError, EstimationError, SpecError
from cairn.model_library.defn import IndicatorType, MatrixKind

logger = logging.getLogger('cairn.model_library.correlations.polycorr')

RHO_BOUND = 1. - 1e-6
BOUNDARY_TOL = 1e-5
MIN_EIGENVALUE = 1e-6
EMPTY_CATEGORY_COUNT = 0.5

ThresholdVector = namedtuple('ThresholdVector', ['tau', 'levels'])
ThresholdVector.__doc__ = 'tau: w - 1 strictly increasing thresholds; levels: the category values in order'

CorrelationMatrix = namedtuple('CorrelationMatrix', ['matrix', 'names', 'kind', 'repaired', 'boundary_pairs',
                                                     'min_eigenvalue'])


def zscore(x):
    """Column standardized to mean 0 and (population) standard deviation 1."""
    x = np.asarray(x, dtype=float)
    sd = x.std()
    if not sd > 0:
        raise DegenerateColumnError('Column has zero variance')
    return (x - x.mean()) / sd


def pearson(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.std() == 0:
        raise DegenerateColumnError('Column has zero variance', column='x')
    if y.std() == 0:
        raise DegenerateColumnError('Column has zero variance', column='y')
    return float(np.clip(np.corrcoef(x, y)[0, 1], -1., 1.))


def estimate_thresholds(col, categories=None):
    """
    Thresholds tau_j = Phi^-1(proportion of values <= level j).

    Parameters
    ----------
    col : array_like
        Ordinal values.
    categories : int, optional
        Declared category count w; levels are then 1..w and empty categories
        receive a pseudo-count of 0.5. Without it the observed distinct values
        are the levels.

    Returns
    -------
    ThresholdVector
    """
    col = np.asarray(col)
    observed, counts = np.unique(col, return_counts=True)
    if len(observed) < 2:
        raise DegenerateColumnError('Ordinal column has a single observed category')
    if categories is None:
        levels = observed
        counts = counts.astype(float)
    else:
        levels = np.arange(1, categories + 1)
        full = np.zeros(categories)
        for value, count in zip(observed, counts):
            full[int(value) - 1] = count
        counts = np.where(full == 0, EMPTY_CATEGORY_COUNT, full)
    cumulative = np.cumsum(counts)[:-1] / counts.sum()
    return ThresholdVector(scipy.stats.norm.ppf(cumulative), levels)


def _codes(col, thresholds):
    return np.searchsorted(thresholds.levels, np.asarray(col))


def bivariate_normal_cdf(h, k, rho):
    """
    P(X <= h, Y <= k) for a standard bivariate normal with correlation rho,
    evaluated through Owen's T function. Broadcasts over h and k; infinite
    limits are allowed.
    """
    h, k = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(k, dtype=float))
    out = np.empty(h.shape)
    finite = np.isfinite(h) & np.isfinite(k)

    neg = (h == -np.inf) | (k == -np.inf)
    out[neg] = 0.
    hinf = (h == np.inf) & ~neg
    out[hinf] = scipy.stats.norm.cdf(k[hinf])
    kinf = (k == np.inf) & ~neg & ~hinf
    out[kinf] = scipy.stats.norm.cdf(h[kinf])

    hf = h[finite]
    kf = k[finite]
    # the formula divides by h and k
    hf = np.where(hf == 0, 1e-12, hf)
    kf = np.where(kf == 0, 1e-12, kf)
    s = np.sqrt(1. - rho * rho)
    a_h = (kf - rho * hf) / (hf * s)
    a_k = (hf - rho * kf) / (kf * s)
    beta = np.where(hf * kf > 0, 0., 0.5)
    out[finite] = (0.5 * (scipy.stats.norm.cdf(hf) + scipy.stats.norm.cdf(kf))
                   - scipy.special.owens_t(hf, a_h) - scipy.special.owens_t(kf, a_k) - beta)
    return np.clip(out, 0., 1.)


def _maximize(neg_loglik, label):
    res = scipy.optimize.minimize_scalar(neg_loglik, bounds=(-RHO_BOUND, RHO_BOUND), method='bounded',
                                         options={'xatol': 1e-8, 'maxiter': 500})
    if not res.success or not np.isfinite(res.fun):
        raise EstimationError('{} correlation did not converge: {}'.format(label, res.message), last_iterate=res.x)
    rho = float(res.x)
    boundary = abs(rho) >= 1. - BOUNDARY_TOL
    if boundary:
        rho = float(np.sign(rho) * RHO_BOUND)
    return rho, boundary


def _polychoric(x, y, tx, ty):
    cx, cy = _codes(x, tx), _codes(y, ty)
    table = np.zeros((len(tx.tau) + 1, len(ty.tau) + 1))
    np.add.at(table, (cx, cy), 1.)
    hx = np.concatenate(([-np.inf], tx.tau, [np.inf]))
    hy = np.concatenate(([-np.inf], ty.tau, [np.inf]))
    grid_h, grid_k = np.meshgrid(hx, hy, indexing='ij')
    nonzero = table > 0

    def neg_loglik(rho):
        cdf = bivariate_normal_cdf(grid_h, grid_k, rho)
        cells = np.diff(np.diff(cdf, axis=0), axis=1)
        return -np.sum(table[nonzero] * np.log(np.maximum(cells[nonzero], 1e-300)))

    return _maximize(neg_loglik, 'Polychoric')


def _polyserial(x, y, ty):
    z = zscore(x)
    cy = _codes(y, ty)
    upper = np.concatenate((ty.tau, [np.inf]))[cy]
    lower = np.concatenate(([-np.inf], ty.tau))[cy]

    def neg_loglik(rho):
        s = np.sqrt(1. - rho * rho)
        p = scipy.stats.norm.cdf((upper - rho * z) / s) - scipy.stats.norm.cdf((lower - rho * z) / s)
        return -np.sum(np.log(np.maximum(p, 1e-300)))

    return _maximize(neg_loglik, 'Polyserial')


def polychoric(x, y, x_categories=None, y_categories=None):
    """
    Two-step polychoric correlation of two ordinal columns.

    Estimates on the boundary are clamped at +/-(1 - 1e-6) and logged.
    """
    tx = estimate_thresholds(x, x_categories)
    ty = estimate_thresholds(y, y_categories)
    rho, boundary = _polychoric(x, y, tx, ty)
    if boundary:
        logger.warning('Polychoric correlation on the boundary: {}'.format(rho))
    return rho


def polyserial(x, y, y_categories=None):
    """Two-step polyserial correlation of continuous ``x`` and ordinal ``y``."""
    ty = estimate_thresholds(y, y_categories)
    rho, boundary = _polyserial(x, y, ty)
    if boundary:
        logger.warning('Polyserial correlation on the boundary: {}'.format(rho))
    return rho


def nearest_positive_definite(matrix, min_eigenvalue=MIN_EIGENVALUE, unit_diagonal=True):
    """
    Eigenvalue clipping at ``min_eigenvalue``; for correlation matrices the
    result is rescaled to unit diagonal and, if that pushed the smallest
    eigenvalue below the floor again, shrunk toward the identity.
    """
    values, vectors = np.linalg.eigh(matrix)
    repaired = (vectors * np.maximum(values, min_eigenvalue)) @ vectors.T
    repaired = 0.5 * (repaired + repaired.T)
    if not unit_diagonal:
        return repaired
    d = 1. / np.sqrt(np.diag(repaired))
    repaired = repaired * np.outer(d, d)
    low = np.linalg.eigvalsh(repaired).min()
    if low < min_eigenvalue:
        alpha = (min_eigenvalue - low) / (1. - low)
        repaired = (1. - alpha) * repaired + alpha * np.eye(repaired.shape[0])
    np.fill_diagonal(repaired, 1.)
    return repaired


def mixed_correlation_matrix(d, use_covariance=False):
    """
    Sample matrix S for a dataset with continuous and ordinal columns.

    Pairs are dispatched by column type (Pearson, polyserial, polychoric).
    A matrix that is not positive definite is repaired and flagged.

    Parameters
    ----------
    d : Dataset
    use_covariance : bool
        Return the sample covariance matrix instead; only allowed when every
        column is continuous.

    Returns
    -------
    CorrelationMatrix
    """
    names = list(d.column_types)
    types = [d.column_types[name] for name in names]
    p = len(names)
    all_continuous = all(t.kind == IndicatorType.CONTINUOUS for t in types)

    if use_covariance:
        if not all_continuous:
            raise SpecError('A covariance matrix needs continuous columns only')
        values = np.column_stack([d.column(name) for name in names]).astype(float)
        for name, col in zip(names, values.T):
            if col.std() == 0:
                raise DegenerateColumnError('Column {} has zero variance'.format(name), column=name)
        matrix = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
        kind = MatrixKind.COVARIANCE
    else:
        kind = MatrixKind.CORRELATION
        matrix = np.eye(p)

    columns = dict()
    thresholds = dict()
    boundary_pairs = []
    if not use_covariance:
        for name, t in zip(names, types):
            columns[name] = np.asarray(d.column(name))
            try:
                if t.kind == IndicatorType.ORDINAL:
                    thresholds[name] = estimate_thresholds(columns[name], t.categories)
                elif columns[name].std() == 0:
                    raise DegenerateColumnError('Column has zero variance')
            except DegenerateColumnError as e:
                raise DegenerateColumnError('Column {}: {}'.format(name, e), column=name) from e

        for i in range(p):
            for j in range(i + 1, p):
                a, b = names[i], names[j]
                ta, tb = types[i].kind, types[j].kind
                try:
                    boundary = False
                    if ta == IndicatorType.CONTINUOUS and tb == IndicatorType.CONTINUOUS:
                        rho = pearson(columns[a], columns[b])
                    elif ta == IndicatorType.ORDINAL and tb == IndicatorType.ORDINAL:
                        rho, boundary = _polychoric(columns[a], columns[b], thresholds[a], thresholds[b])
                    elif ta == IndicatorType.CONTINUOUS:
                        rho, boundary = _polyserial(columns[a], columns[b], thresholds[b])
                    else:
                        rho, boundary = _polyserial(columns[b], columns[a], thresholds[a])
                except EstimationError as e:
                    raise EstimationError('{} / {}: {}'.format(a, b, e), last_iterate=e.last_iterate) from e
                except DegenerateColumnError as e:
                    raise DegenerateColumnError('{} / {}: {}'.format(a, b, e), column=e.column) from e
                if boundary:
                    boundary_pairs.append((a, b))
                    logger.warning('Correlation of {} and {} on the boundary: {}'.format(a, b, rho))
                matrix[i, j] = matrix[j, i] = rho

    low = float(np.linalg.eigvalsh(matrix).min()) if p else 1.
    repaired = False
    if low < MIN_EIGENVALUE:
        logger.warning('Sample matrix is not positive definite (smallest eigenvalue {:.3g}); repairing'.format(low))
        matrix = nearest_positive_definite(matrix, unit_diagonal=not use_covariance)
        repaired = True
        low = float(np.linalg.eigvalsh(matrix).min())
    return CorrelationMatrix(matrix, tuple(names), kind, repaired, tuple(boundary_pairs), low)
