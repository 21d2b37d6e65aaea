#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Exception types raised by CAIRN.

Everything derives from :py:class:`CairnError` so that callers (most notably
the command line interface) can separate modelling problems from programming
errors. Each class also derives from the closest builtin so that code written
against ``ValueError``/``ArithmeticError`` keeps working.
"""


class CairnError(Exception):
    pass


class SpecError(CairnError, ValueError):
    """Malformed or inconsistent SemSpec, structure, prior knowledge or configuration."""
    pass


class DataIngestionError(CairnError, ValueError):
    def __init__(self, message, rows=None):
        self.rows = list(rows) if rows is not None else []
        if self.rows:
            shown = ', '.join(str(r) for r in self.rows[:20])
            if len(self.rows) > 20:
                shown += ', ...'
            message = '{} (rows: {})'.format(message, shown)
        super().__init__(message)


class DegenerateColumnError(CairnError, ValueError):
    def __init__(self, message, column=None):
        self.column = column
        super().__init__(message)


class DegenerateModelError(CairnError, ArithmeticError):
    pass


class DegenerateMeasurementError(DegenerateModelError):
    pass


class NumericDomainError(CairnError, ArithmeticError):
    """A matrix that must be positive definite is not."""
    pass


class EstimationError(CairnError, RuntimeError):
    def __init__(self, message, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class NoEstimateError(CairnError, ValueError):
    pass


class PartialRunError(CairnError, RuntimeError):
    def __init__(self, message, completed=0, requested=0):
        self.completed = completed
        self.requested = requested
        super().__init__(message)
