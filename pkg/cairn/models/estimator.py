#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
This module provides the maximum likelihood fit of an identified structure:
quasi-Newton minimization of F_ML over the free parameters with central
finite-difference gradients.

Non-convergence is reported in the :py:class:`FitResult`, never raised.
"""
import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

import cairn.model_library.decl as decl
import cairn.model_library.sem.sem_calc as sem_calc
from cairn.common.errors import DegenerateModelError, NumericDomainError
from cairn.model_library.defn import ExogenousCovariance
from cairn.model_library.sem.identification import build_pattern

logger = logging.getLogger('cairn.models.estimator')

# objective value reported when Sigma(theta) leaves the admissible region
_INADMISSIBLE = 1e10
BOUNDARY_VARIANCE = 1e-4
START_VARIANCE_FLOOR = 0.05


@dataclass(frozen=True)
class FitOptions:
    maxiter: int = 500
    gtol: float = 1e-5
    ftol: float = 1e-9


@dataclass(frozen=True, eq=False)
class FitResult:
    theta_hat: object
    f_ml: float
    chi_square: float
    t: int
    converged: bool
    iterations: int
    condition_flags: frozenset = frozenset()
    df: int = 0
    bic: float = 0.
    N: int = 0
    message: str = ''

    def to_dict(self):
        return OrderedDict([('f_ml', self.f_ml),
                            ('chi_square', self.chi_square),
                            ('t', self.t),
                            ('df', self.df),
                            ('bic', self.bic),
                            ('N', self.N),
                            ('converged', self.converged),
                            ('iterations', self.iterations),
                            ('condition_flags', sorted(self.condition_flags)),
                            ('message', self.message),
                            ('parameters', self.theta_hat.named_values()),
                            ])


def start_values(pattern, S):
    """
    Deterministic starting point: free loadings 1, free coefficients 0.1,
    variances half the matching diagonal of ``S`` (at least 0.05),
    exogenous covariances 0.

    Parameters
    ----------
    pattern : SemParameters
        Free/fixed pattern (see :py:func:`build_pattern`).
    S : numpy.ndarray
        Sample matrix in canonical indicator order.

    Returns
    -------
        SemParameters
    """
    lay = pattern.layout
    half = np.maximum(0.5 * np.diag(np.asarray(S, dtype=float)), START_VARIANCE_FLOOR)
    mask = pattern.free_mask
    values = {name: np.array(m) for name, m in pattern.matrices().items()}

    for name in ('B', 'Gamma'):
        values[name][mask[name]] = 0.1
    for name in ('LambdaX', 'LambdaY'):
        values[name][mask[name]] = 1.

    phi = np.zeros_like(values['Phi'])
    for k, node in enumerate(lay.exogenous):
        phi[k, k] = half[lay.markers[node]]
    values['Phi'] = np.where(mask['Phi'], phi, values['Phi'])
    for k, node in enumerate(lay.endogenous):
        if mask['Psi'][k, k]:
            values['Psi'][k, k] = half[lay.markers[node]]
    for name, indicators in (('ThetaEpsilon', lay.y_indicators), ('ThetaDelta', lay.x_indicators)):
        for k, i in enumerate(indicators):
            if mask[name][k, k]:
                values[name][k, k] = half[i]
    return pattern.with_matrices(values)


def _objective(pattern, S_model, slots, fixed, flags):
    def f(theta):
        try:
            params = pattern.with_matrices(decl.unpack(slots, theta, fixed))
            return sem_calc.f_ml(params, S_model)
        except (NumericDomainError, DegenerateModelError):
            flags.add('non_pd')
            return _INADMISSIBLE
    return f


def _boundary(params):
    mask = params.free_mask
    for name in ('Psi', 'ThetaDelta', 'ThetaEpsilon', 'Phi'):
        diag = np.diag(getattr(params, name))[np.diag(mask[name])]
        if np.any(diag < BOUNDARY_VARIANCE):
            return True
    return False


def fit(pattern, S, N, options=None, start=None):
    """
    Maximum likelihood estimate of the free parameters of ``pattern``.

    Parameters
    ----------
    pattern : SemParameters
        Identified free/fixed pattern.
    S : numpy.ndarray
        Positive definite sample matrix in canonical indicator order.
    N : int
        Sample size (at least 2).
    options : FitOptions (optional)
    start : SemParameters (optional)
        Starting point; defaults to :py:func:`start_values`.

    Returns
    -------
        FitResult

    Raises
    ------
        NumericDomainError
            If ``S`` is not positive definite.
    """
    if N < 2:
        raise ValueError('Sample size must be at least 2, got {}'.format(N))
    options = options or FitOptions()
    S = np.asarray(S, dtype=float)
    sem_calc.cholesky_logdet('S', S)
    S_model = sem_calc.from_canonical(S, pattern.layout)
    if start is None:
        start = start_values(pattern, S)

    slots = start.slots()
    fixed = start.matrices()
    flags = set()
    objective = _objective(pattern, S_model, slots, fixed, flags)
    theta0 = start.pack()

    if len(theta0) == 0:
        value = objective(theta0)
        converged, iterations, message, theta_hat = True, 0, 'no free parameters', start
    else:
        res = scipy.optimize.minimize(objective, theta0, method='L-BFGS-B', jac='3-point',
                                      options={'maxiter': options.maxiter, 'gtol': options.gtol,
                                               'ftol': options.ftol})
        value = float(res.fun)
        iterations = int(res.nit)
        message = res.message if isinstance(res.message, str) else res.message.decode()
        converged = bool(res.success)
        # line-search failures at a stationary point are numerical noise of the finite differences
        if not converged and res.status == 2 and np.max(np.abs(res.jac)) < 10 * options.gtol:
            converged = True
        if res.status == 1:
            flags.add('max_iterations')
        theta_hat = start.unpack(res.x)

    if value >= _INADMISSIBLE:
        converged = False
    if _boundary(theta_hat):
        flags.add('boundary')
    if not converged:
        logger.debug('Fit did not converge after {} iterations: {}'.format(iterations, message))

    t = pattern.n_free
    chi2 = sem_calc.chi_square(value, N)
    return FitResult(theta_hat=theta_hat, f_ml=value, chi_square=chi2, t=t, converged=converged,
                     iterations=iterations, condition_flags=frozenset(flags),
                     df=sem_calc.degrees_of_freedom(pattern), bic=sem_calc.bic(chi2, t, N), N=N,
                     message=message)


def _central_gradient(f, theta, h):
    g = np.empty(len(theta))
    for k in range(len(theta)):
        step = np.zeros(len(theta))
        step[k] = h
        g[k] = (f(theta + step) - f(theta - step)) / (2 * h)
    return g


def gradient_check(pattern, theta, S):
    """
    Worst disagreement between central-difference gradients of F_ML at
    steps 1e-4 and 1e-6.

    Parameters
    ----------
    pattern : SemParameters
    theta : numpy.ndarray
        Unconstrained parameter vector (see :py:meth:`SemParameters.pack`).
    S : numpy.ndarray
        Sample matrix in canonical order.

    Returns
    -------
        float
    """
    S_model = sem_calc.from_canonical(np.asarray(S, dtype=float), pattern.layout)
    flags = set()
    f = _objective(pattern, S_model, pattern.slots(), pattern.matrices(), flags)
    theta = np.asarray(theta, dtype=float)
    coarse = _central_gradient(f, theta, 1e-4)
    fine = _central_gradient(f, theta, 1e-6)
    return float(np.max(np.abs(coarse - fine))) if len(theta) else 0.


def gradient(pattern, theta, S, h=1e-6):
    """Central-difference gradient of F_ML at ``theta``."""
    S_model = sem_calc.from_canonical(np.asarray(S, dtype=float), pattern.layout)
    f = _objective(pattern, S_model, pattern.slots(), pattern.matrices(), set())
    return _central_gradient(f, np.asarray(theta, dtype=float), h)


@dataclass
class FitCache:
    """
    Thread-safe store of FitResults keyed by (structure digest, subset index).
    """
    _store: dict = field(default_factory=dict)
    _lock: object = field(default_factory=threading.Lock)
    hits: int = 0
    misses: int = 0

    def get(self, key):
        with self._lock:
            result = self._store.get(key)
            if result is None:
                self.misses += 1
            else:
                self.hits += 1
            return result

    def put(self, key, result):
        with self._lock:
            self._store.setdefault(key, result)

    def __len__(self):
        with self._lock:
            return len(self._store)

    def __contains__(self, key):
        with self._lock:
            return key in self._store


def fit_structure(measurement, structural, identification, S, N, options=None,
                  exogenous_covariances=ExogenousCovariance.FREE, cache=None, subset_index=0):
    """
    Build the pattern of ``structural`` and fit it, consulting ``cache`` first.

    Returns
    -------
        FitResult
    """
    key = (structural.digest(), subset_index)
    if cache is not None:
        result = cache.get(key)
        if result is not None:
            return result
    pattern = build_pattern(measurement, structural, identification, exogenous_covariances)
    result = fit(pattern, S, N, options)
    if cache is not None:
        cache.put(key, result)
    return result
