#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

from enum import Enum

class IndicatorType(Enum):
    CONTINUOUS = 'continuous'
    ORDINAL = 'ordinal'

class NodeRole(Enum):
    LATENT = 'latent'
    COVARIATE = 'covariate'

class StabilityKind(Enum):
    EDGE = 'edge'
    CAUSAL_PATH = 'causal_path'


class EdgeDirection(Enum):
    DIRECTED = 'directed'
    UNDIRECTED = 'undirected'

class ExogenousCovariance(Enum):
    FREE = 'free'
    ZERO = 'zero'

class IdaMethod(Enum):
    LOCAL = 'local'
    GLOBAL = 'global'

class MatrixKind(Enum):
    CORRELATION = 'correlation'
    COVARIANCE = 'covariance'

class ParamTransform(Enum):
    IDENTITY = 'identity'
    LOG = 'log'
    CHOLESKY = 'cholesky'

MIN_CATEGORIES = 2
MAX_CATEGORIES = 7

# sentinel chi-square for fits that did not converge
NONCONVERGED_CHI_SQUARE = 1e12

SCHEMA_VERSION = 1
