#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Typed, complete observational data.

A :py:class:`Dataset` wraps a pandas DataFrame whose columns are the
observed variables of a model in canonical order, together with the type of
every column. Ordinal columns hold the integer codes 1..w, and every code
must occur in the full data; subsets made with :py:meth:`Dataset.take` are
not checked again, so a category may be missing from a subsample.
"""
import logging
from collections import OrderedDict

import numpy as np
import pandas as pd

from cairn.common.errors import DataIngestionError
from cairn.model_library.defn import IndicatorType

logger = logging.getLogger('cairn.data.dataset')


class Dataset(object):
    def __init__(self, frame, column_types, validate=True):
        """
        Parameters
        ----------
        frame : pandas.DataFrame
            One column per entry of ``column_types`` (extra columns are dropped).
        column_types : OrderedDict
            Column name -> ColumnType, in the order the columns are to be kept.
        validate : bool
            Check completeness and ordinal codes.
        """
        self.column_types = OrderedDict(column_types)
        missing = [name for name in self.column_types if name not in frame.columns]
        if missing:
            raise DataIngestionError('Data has no column(s) {}'.format(', '.join(missing)))
        self.frame = frame.loc[:, list(self.column_types)].reset_index(drop=True)
        if validate:
            self.validate()

    def validate(self):
        if len(self.frame) == 0:
            raise DataIngestionError('Data has no rows')
        incomplete = np.flatnonzero(self.frame.isna().any(axis=1).to_numpy())
        if len(incomplete):
            raise DataIngestionError('Data has missing values', rows=incomplete.tolist())
        for name, ctype in self.column_types.items():
            col = self.frame[name]
            if not pd.api.types.is_numeric_dtype(col):
                raise DataIngestionError('Column {} is not numeric'.format(name))
            if ctype.kind != IndicatorType.ORDINAL:
                continue
            values = col.to_numpy(dtype=float)
            bad = np.flatnonzero((values != np.round(values)) | (values < 1) | (values > ctype.categories))
            if len(bad):
                raise DataIngestionError('Ordinal column {} must hold integers in 1..{}'.format(
                    name, ctype.categories), rows=bad.tolist())
            unseen = sorted(set(range(1, ctype.categories + 1)) - set(values.astype(int)))
            if unseen:
                raise DataIngestionError('Ordinal column {}: categories {} are never observed'.format(name, unseen))

    @property
    def n_rows(self):
        return len(self.frame)

    @property
    def names(self):
        return list(self.column_types)

    def column(self, name):
        return self.frame[name].to_numpy()

    def values(self):
        return self.frame.to_numpy(dtype=float)

    def take(self, rows):
        """Dataset restricted to the given row indices."""
        return Dataset(self.frame.iloc[np.asarray(rows)], self.column_types, validate=False)

    def select(self, names):
        return Dataset(self.frame, OrderedDict((n, self.column_types[n]) for n in names), validate=False)

    def with_column_types(self, column_types):
        return Dataset(self.frame, column_types)

    def to_csv(self, filename):
        frame = self.frame.copy()
        for name, ctype in self.column_types.items():
            if ctype.kind == IndicatorType.ORDINAL:
                frame[name] = frame[name].astype(int)
        frame.to_csv(filename, index=False, float_format='%.10g')
