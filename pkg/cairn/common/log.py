#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
This is the logging configuration for CAIRN.

The documentation below is primarily for CAIRN developers.

Examples
========
To use the logger in your code, add the following
after your import
.. code-block:: python

   import logging
   logger = logging.getLogger('cairn.path.to.module')

Then, you can use the standard logging functions
.. code-block:: python

   logger.debug('message')
   logger.info('message')
   logger.warning('message')
   logger.error('message')
   logger.critical('message')

Note that by default, any message that has a logging level
of info or higher will be logged. Messages go to standard error
so that data written to standard output (e.g., the JSON printed
by ``cairn fit``) stays machine readable.

Progress events can carry structured fields through ``extra``
.. code-block:: python

   logger.info('subset complete', extra={'event': 'subset_done', 'subset': 3})

These fields are dropped by the plain formatter and emitted by the
JSON-lines formatter installed with :py:func:`use_json_logs`.
"""
import sys
import json
import logging
log_format = '%(message)s'

# attributes present on every LogRecord; anything else came in through ``extra``
_RESERVED = set(logging.LogRecord('', 0, '', 0, '', (), None).__dict__) | {'message', 'asctime'}


class JsonLinesFormatter(logging.Formatter):
    """Formats each record as a single JSON object per line."""

    def format(self, record):
        doc = {'level': record.levelname,
               'logger': record.name,
               'message': record.getMessage(),
               }
        for key, value in record.__dict__.items():
            if key not in _RESERVED and not key.startswith('_'):
                doc[key] = value
        if record.exc_info:
            doc['exc_info'] = self.formatException(record.exc_info)
        return json.dumps(doc, sort_keys=True, default=str)


# configure the root logger for cairn
logger = logging.getLogger('cairn')
logger.setLevel(logging.INFO)

console_handler = logging.StreamHandler(sys.stderr)
fmtr = logging.Formatter(log_format)
console_handler.setFormatter(fmtr)
logger.addHandler(console_handler)


def use_json_logs(enable=True):
    """
    Switch the console handler between the plain and the JSON-lines format.

    Parameters
    ----------
    enable : bool
        If True, emit JSON lines; otherwise revert to the plain message format.
    """
    if enable:
        console_handler.setFormatter(JsonLinesFormatter())
    else:
        console_handler.setFormatter(logging.Formatter(log_format))


def set_verbosity(verbose=0):
    """Map a ``-v`` count onto the package log level (0: INFO, 1+: DEBUG, -1: WARNING)."""
    if verbose >= 1:
        logger.setLevel(logging.DEBUG)
    elif verbose < 0:
        logger.setLevel(logging.WARNING)
    else:
        logger.setLevel(logging.INFO)
