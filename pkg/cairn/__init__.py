#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

from .common import log
