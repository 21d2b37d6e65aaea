#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
This module has a number of utilities to assist in declaring the free
parameters of a model and moving between the matrix representation and the
unconstrained vector the optimizer works on.

A declaration is a list of :py:class:`ParamSlot`, one per free entry. Each
slot names the matrix, the entry, and the transform applied when packing:

* ``IDENTITY`` - the entry itself (coefficients, loadings),
* ``LOG`` - log of a diagonal variance (disturbances, indicator errors),
* ``CHOLESKY`` - an entry of the lower Cholesky factor L of a covariance
  matrix M = LL', with the diagonal of L stored as a log. A matrix declared
  this way is rebuilt entirely from its slots.
"""
from collections import namedtuple

import numpy as np
import scipy.linalg

from cairn.common.errors import NumericDomainError
from cairn.model_library.defn import ParamTransform

ParamSlot = namedtuple('ParamSlot', ['matrix', 'row', 'col', 'transform'])

# exp() arguments are clipped to keep the optimizer away from overflow
_LOG_CLIP = 50.


def declare_params(slots, matrix, free_mask, transform=ParamTransform.IDENTITY):
    """
    Append a slot for every free entry of ``matrix``.

    Parameters
    ----------
    slots : list of ParamSlot
        The declaration being built; modified in place and returned.
    matrix : str
        Name of the matrix (key used by :py:func:`pack` and :py:func:`unpack`).
    free_mask : array_like of bool
        Free entries. For ``CHOLESKY`` only the lower triangle is used.
    transform : ParamTransform

    Returns
    -------
    list of ParamSlot
    """
    mask = np.asarray(free_mask, dtype=bool)
    if transform == ParamTransform.CHOLESKY:
        mask = np.tril(mask)
    for r, c in zip(*np.nonzero(mask)):
        if transform == ParamTransform.LOG and r != c:
            raise ValueError('Log-transformed parameter {}[{}, {}] must lie on the diagonal'.format(matrix, r, c))
        slots.append(ParamSlot(matrix, int(r), int(c), transform))
    return slots


def _cholesky_factor(name, m):
    if m.shape[0] == 0:
        return m.copy()
    try:
        return scipy.linalg.cholesky(m, lower=True)
    except np.linalg.LinAlgError:
        raise NumericDomainError('Matrix {} is not positive definite'.format(name))


def pack(slots, matrices):
    """Unconstrained parameter vector for the free entries of ``matrices``."""
    theta = np.empty(len(slots))
    factors = dict()
    for k, s in enumerate(slots):
        if s.transform == ParamTransform.CHOLESKY:
            if s.matrix not in factors:
                factors[s.matrix] = _cholesky_factor(s.matrix, matrices[s.matrix])
            value = factors[s.matrix][s.row, s.col]
            theta[k] = np.log(value) if s.row == s.col else value
        elif s.transform == ParamTransform.LOG:
            value = matrices[s.matrix][s.row, s.col]
            if value <= 0:
                raise NumericDomainError('Variance {}[{}, {}] must be positive, got {}'.format(
                    s.matrix, s.row, s.col, value))
            theta[k] = np.log(value)
        else:
            theta[k] = matrices[s.matrix][s.row, s.col]
    return theta


def unpack(slots, theta, matrices):
    """
    Copy of ``matrices`` with the free entries set from ``theta``.

    Fixed entries are taken from ``matrices`` unchanged.
    """
    out = {name: np.array(m, dtype=float, copy=True) for name, m in matrices.items()}
    factors = dict()
    for s, value in zip(slots, theta):
        if s.transform == ParamTransform.CHOLESKY:
            if s.matrix not in factors:
                factors[s.matrix] = np.zeros_like(out[s.matrix])
            factors[s.matrix][s.row, s.col] = np.exp(np.clip(value, -_LOG_CLIP, _LOG_CLIP)) \
                if s.row == s.col else value
        elif s.transform == ParamTransform.LOG:
            out[s.matrix][s.row, s.col] = np.exp(np.clip(value, -_LOG_CLIP, _LOG_CLIP))
        else:
            out[s.matrix][s.row, s.col] = value
    for name, l in factors.items():
        out[name] = l @ l.T
    return out
