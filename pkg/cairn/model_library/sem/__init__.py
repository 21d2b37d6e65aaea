#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

from cairn.model_library.sem.structure import (ColumnType, CONTINUOUS, ordinal, MeasurementSpec, StructuralSpec,
                                               PriorKnowledge)
from cairn.model_library.sem.params import SemLayout, SemParameters
from cairn.model_library.sem.sem_calc import (implied_covariance, ml_discrepancy, f_ml, chi_square, complexity, bic,
                                              degrees_of_freedom)
from cairn.model_library.sem.identification import (identify_measurement, build_pattern, apply_identification,
                                                    free_parameter_count)
