#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Emit one record through a cairn module logger.

usage: logging_ext.py LEVEL MESSAGE VERBOSITY [json]
"""
import sys
import logging

from cairn.common import log

level, message, verbosity = sys.argv[1], sys.argv[2], int(sys.argv[3])
log.set_verbosity(verbosity)
if 'json' in sys.argv[4:]:
    log.use_json_logs()

logger = logging.getLogger('cairn.models.search')
getattr(logger, level)(message, extra={'event': 'subset_done', 'subset': 7})
