#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Numeric values of a structural equation model.

Structural nodes are split into endogenous nodes (eta, those with at least
one parent) and exogenous nodes (xi, the rest). Observed indicators are
split accordingly into the y block (indicators of endogenous nodes) and the
x block. The eight parameter matrices are

=============  ========  ====================================================
B              m x m     coefficients among endogenous nodes, B[j, i] for i -> j
Gamma          m x n     coefficients from exogenous to endogenous nodes
Phi            n x n     covariance of the exogenous nodes
Psi            m x m     disturbance variances (diagonal)
LambdaX        r x n     loadings of the x block
LambdaY        q x m     loadings of the y block
ThetaDelta     r x r     x-block error variances (diagonal)
ThetaEpsilon   q x q     y-block error variances (diagonal)
=============  ========  ====================================================

Every matrix has a boolean free mask of the same shape. Entries that are
not free keep their stored value during estimation.
"""
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

import cairn.model_library.decl as decl
from cairn.common.errors import SpecError
from cairn.model_library.defn import ParamTransform

MATRIX_NAMES = ('B', 'Gamma', 'Phi', 'Psi', 'LambdaX', 'LambdaY', 'ThetaDelta', 'ThetaEpsilon')

_TRANSFORMS = {'B': ParamTransform.IDENTITY,
               'Gamma': ParamTransform.IDENTITY,
               'Phi': ParamTransform.CHOLESKY,
               'Psi': ParamTransform.LOG,
               'LambdaX': ParamTransform.IDENTITY,
               'LambdaY': ParamTransform.IDENTITY,
               'ThetaDelta': ParamTransform.LOG,
               'ThetaEpsilon': ParamTransform.LOG,
               }


@dataclass(frozen=True)
class SemLayout:
    """
    Index bookkeeping shared by a pattern and every parameter set derived
    from it. Node indices refer to the structural node order; indicator
    indices refer to the canonical observed-column order.
    """
    node_names: tuple
    indicator_names: tuple
    endogenous: tuple
    exogenous: tuple
    y_indicators: tuple
    x_indicators: tuple
    indicator_node: tuple
    markers: tuple

    @classmethod
    def from_specs(cls, measurement, structural, markers):
        adjacency = structural.adjacency
        endogenous = tuple(j for j in range(structural.n_nodes) if adjacency[:, j].any())
        exogenous = tuple(j for j in range(structural.n_nodes) if not adjacency[:, j].any())
        node_indicators = measurement.node_indicator_indices()
        indicator_node = [None] * measurement.n_indicators
        for node, indices in enumerate(node_indicators):
            for i in indices:
                indicator_node[i] = node
        y_indicators = tuple(i for node in endogenous for i in node_indicators[node])
        x_indicators = tuple(i for node in exogenous for i in node_indicators[node])
        return cls(tuple(measurement.node_names), tuple(measurement.indicator_names), endogenous, exogenous,
                   y_indicators, x_indicators, tuple(indicator_node), tuple(markers))

    @property
    def indicator_order(self):
        """Canonical indices of the model's indicators in y-then-x order."""
        return self.y_indicators + self.x_indicators

    @property
    def p(self):
        return len(self.indicator_names)

    @property
    def n_nodes(self):
        return len(self.node_names)


@dataclass(frozen=True, eq=False)
class SemParameters:
    B: np.ndarray
    Gamma: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    LambdaX: np.ndarray
    LambdaY: np.ndarray
    ThetaDelta: np.ndarray
    ThetaEpsilon: np.ndarray
    free_mask: dict
    layout: SemLayout

    def __post_init__(self):
        m, n = len(self.layout.endogenous), len(self.layout.exogenous)
        q, r = len(self.layout.y_indicators), len(self.layout.x_indicators)
        shapes = {'B': (m, m), 'Gamma': (m, n), 'Phi': (n, n), 'Psi': (m, m),
                  'LambdaX': (r, n), 'LambdaY': (q, m), 'ThetaDelta': (r, r), 'ThetaEpsilon': (q, q)}
        masks = dict()
        for name in MATRIX_NAMES:
            value = np.array(getattr(self, name), dtype=float, copy=True).reshape(shapes[name])
            value.setflags(write=False)
            object.__setattr__(self, name, value)
            mask = np.array(self.free_mask.get(name, np.zeros(shapes[name])), dtype=bool, copy=True)
            if mask.shape != shapes[name]:
                raise SpecError('Free mask of {} has shape {}, expected {}'.format(name, mask.shape, shapes[name]))
            mask.setflags(write=False)
            masks[name] = mask
        object.__setattr__(self, 'free_mask', masks)

    def matrices(self):
        return OrderedDict((name, getattr(self, name)) for name in MATRIX_NAMES)

    def with_matrices(self, matrices):
        values = self.matrices()
        values.update(matrices)
        return SemParameters(free_mask=self.free_mask, layout=self.layout, **values)

    def slots(self):
        """Declaration of the free parameters, in a fixed order."""
        slots = []
        for name in MATRIX_NAMES:
            decl.declare_params(slots, name, self.free_mask[name], _TRANSFORMS[name])
        return slots

    @property
    def n_free(self):
        return len(self.slots())

    def pack(self):
        return decl.pack(self.slots(), self.matrices())

    def unpack(self, theta):
        return self.with_matrices(decl.unpack(self.slots(), theta, self.matrices()))

    def structural_coefficients(self):
        """n_nodes x n_nodes matrix with entry (i, j) the coefficient of i -> j."""
        lay = self.layout
        coef = np.zeros((lay.n_nodes, lay.n_nodes))
        for a, j in enumerate(lay.endogenous):
            for b, i in enumerate(lay.endogenous):
                coef[i, j] = self.B[a, b]
            for b, i in enumerate(lay.exogenous):
                coef[i, j] = self.Gamma[a, b]
        return coef

    def loadings(self):
        """p x n_nodes loading matrix in canonical indicator order."""
        lay = self.layout
        lam = np.zeros((lay.p, lay.n_nodes))
        for row, i in enumerate(lay.y_indicators):
            for col, node in enumerate(lay.endogenous):
                lam[i, node] = self.LambdaY[row, col]
        for row, i in enumerate(lay.x_indicators):
            for col, node in enumerate(lay.exogenous):
                lam[i, node] = self.LambdaX[row, col]
        return lam

    def error_variances(self):
        """Indicator error variances in canonical order."""
        lay = self.layout
        theta = np.zeros(lay.p)
        theta[list(lay.y_indicators)] = np.diag(self.ThetaEpsilon)
        theta[list(lay.x_indicators)] = np.diag(self.ThetaDelta)
        return theta

    def named_values(self, free_only=True):
        """
        Readable parameter table: ``a -> b`` coefficients, ``f =~ x`` loadings,
        ``a ~~ b`` (co)variances.
        """
        lay = self.layout
        names, ind = lay.node_names, lay.indicator_names
        endo, exo = lay.endogenous, lay.exogenous
        y, x = lay.y_indicators, lay.x_indicators

        def _label(matrix, r, c):
            if matrix == 'B':
                return '{} -> {}'.format(names[endo[c]], names[endo[r]])
            if matrix == 'Gamma':
                return '{} -> {}'.format(names[exo[c]], names[endo[r]])
            if matrix == 'Phi':
                return '{} ~~ {}'.format(names[exo[r]], names[exo[c]])
            if matrix == 'Psi':
                return '{} ~~ {}'.format(names[endo[r]], names[endo[c]])
            if matrix == 'LambdaX':
                return '{} =~ {}'.format(names[exo[c]], ind[x[r]])
            if matrix == 'LambdaY':
                return '{} =~ {}'.format(names[endo[c]], ind[y[r]])
            if matrix == 'ThetaDelta':
                return '{} ~~ {}'.format(ind[x[r]], ind[x[c]])
            return '{} ~~ {}'.format(ind[y[r]], ind[y[c]])

        values = OrderedDict()
        for name in MATRIX_NAMES:
            value = getattr(self, name)
            mask = self.free_mask[name] if free_only else np.ones(value.shape, dtype=bool)
            if name == 'Phi':
                mask = np.tril(mask)
            for r, c in zip(*np.nonzero(mask)):
                if name in ('Psi', 'ThetaDelta', 'ThetaEpsilon') and r != c:
                    continue
                values[_label(name, r, c)] = float(value[r, c])
        return values
