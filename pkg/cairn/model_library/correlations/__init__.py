#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

from cairn.model_library.correlations.polycorr import (pearson, estimate_thresholds, polychoric, polyserial,
                                                      mixed_correlation_matrix, nearest_positive_definite,
                                                      bivariate_normal_cdf, zscore, ThresholdVector,
                                                      CorrelationMatrix)
