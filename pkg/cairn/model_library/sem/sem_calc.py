#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
This module collects the covariance-structure algebra: the covariance
matrix implied by a parameter set, the maximum likelihood discrepancy and
the fit/complexity scores built on it.
"""
import math

import numpy as np
import scipy.linalg

from cairn.common.errors import DegenerateModelError, NumericDomainError

# (I - B) with a larger condition number is treated as singular
_SINGULAR_COND = 1e12


def total_effects(B):
    """C = (I - B)^-1"""
    m = B.shape[0]
    if m == 0:
        return np.zeros((0, 0))
    a = np.eye(m) - B
    if not np.all(np.isfinite(a)) or np.linalg.cond(a) > _SINGULAR_COND:
        raise DegenerateModelError('(I - B) is singular')
    try:
        return np.linalg.inv(a)
    except np.linalg.LinAlgError:
        raise DegenerateModelError('(I - B) is singular')


def implied_covariance(params, canonical=False):
    """
    Covariance matrix of the indicators implied by ``params``.

    Parameters
    ----------
    params : SemParameters
    canonical : bool
        If False (the default) rows and columns follow the y-then-x block
        layout of the parameters; if True they follow the canonical
        observed-column order of the dataset.

    Returns
    -------
    numpy.ndarray
        The symmetric p x p matrix Sigma(theta).
    """
    C = total_effects(params.B)
    Ly, Lx = params.LambdaY, params.LambdaX
    Phi, Gamma = params.Phi, params.Gamma

    eta_cov = C @ (Gamma @ Phi @ Gamma.T + params.Psi) @ C.T
    s_yy = Ly @ eta_cov @ Ly.T + params.ThetaEpsilon
    s_yx = Ly @ C @ Gamma @ Phi @ Lx.T
    s_xx = Lx @ Phi @ Lx.T + params.ThetaDelta

    sigma = np.block([[s_yy, s_yx], [s_yx.T, s_xx]])
    sigma = 0.5 * (sigma + sigma.T)
    if canonical:
        return to_canonical(sigma, params.layout)
    return sigma


def to_canonical(matrix, layout):
    """Reorder a y-then-x matrix into canonical indicator order."""
    order = list(layout.indicator_order)
    out = np.empty_like(matrix)
    out[np.ix_(order, order)] = matrix
    return out


def from_canonical(matrix, layout):
    """Reorder a canonical-order matrix (e.g., a sample matrix S) into y-then-x order."""
    order = list(layout.indicator_order)
    return np.asarray(matrix)[np.ix_(order, order)]


def cholesky_logdet(name, m):
    """(Cholesky factor, log-determinant) of a positive definite matrix; NumericDomainError otherwise."""
    try:
        factor = scipy.linalg.cho_factor(m, lower=True)
    except (np.linalg.LinAlgError, ValueError):
        raise NumericDomainError('{} is not positive definite'.format(name))
    diag = np.diag(factor[0])
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise NumericDomainError('{} is not positive definite'.format(name))
    return factor, 2. * np.sum(np.log(diag))


def ml_discrepancy(sigma, S):
    """
    F_ML = log|Sigma| + tr(S Sigma^-1) - log|S| - p, for matrices in the same order.

    Raises
    ------
    NumericDomainError
        If either matrix is not positive definite.
    """
    sigma = np.asarray(sigma, dtype=float)
    S = np.asarray(S, dtype=float)
    if sigma.shape != S.shape:
        raise ValueError('Sigma has shape {} but S has shape {}'.format(sigma.shape, S.shape))
    p = S.shape[0]
    factor, logdet_sigma = cholesky_logdet('Sigma(theta)', sigma)
    _, logdet_s = cholesky_logdet('S', S)
    trace = np.trace(scipy.linalg.cho_solve(factor, S))
    return max(logdet_sigma + trace - logdet_s - p, 0.)


def f_ml(params, S):
    """F_ML of ``params`` against the sample matrix ``S`` given in y-then-x order."""
    return ml_discrepancy(implied_covariance(params), S)


def chi_square(f_ml_value, N):
    """Likelihood ratio statistic (N - 1) F_ML."""
    return (N - 1) * f_ml_value


def complexity(structural):
    """Number of directed relations in the structural model."""
    return int(np.count_nonzero(structural.adjacency))


def bic(chi_square, t, N):
    """chi^2 + t ln(N)"""
    return chi_square + t * math.log(N)


def degrees_of_freedom(pattern):
    p = pattern.layout.p
    return p * (p + 1) // 2 - pattern.n_free


def node_covariance(params):
    """Model-implied covariance of the structural nodes, in node order."""
    lay = params.layout
    C = total_effects(params.B)
    endo, exo = list(lay.endogenous), list(lay.exogenous)
    out = np.zeros((lay.n_nodes, lay.n_nodes))
    out[np.ix_(exo, exo)] = params.Phi
    out[np.ix_(endo, endo)] = C @ (params.Gamma @ params.Phi @ params.Gamma.T + params.Psi) @ C.T
    cross = C @ params.Gamma @ params.Phi
    out[np.ix_(endo, exo)] = cross
    out[np.ix_(exo, endo)] = cross.T
    return 0.5 * (out + out.T)
