#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
This module provides supporting functions for reading (and writing) the
inputs of an analysis: the CSV dataset, the model specification and
structures (edge lists or CPDAGs) as JSON.
"""
import json
import logging
from collections import OrderedDict

import pandas as pd

import cairn.data.sem_spec as ss
from cairn.common.errors import DataIngestionError, SpecError
from cairn.data.dataset import Dataset
from cairn.model_library.defn import SCHEMA_VERSION
from cairn.model_library.graphs.dag import Cpdag
from cairn.model_library.sem.structure import StructuralSpec

logger = logging.getLogger('cairn.parsers.dataset_parser')


def create_Dataset(csv_filename, measurement):
    """
    Parse a CSV file with a header row into a Dataset typed by the
    measurement specification.

    Parameters
    ----------
    csv_filename : str
        Path and filename of the CSV file.
    measurement : MeasurementSpec
        Supplies the column names (canonical order) and types.

    Returns
    -------
        Dataset

    Raises
    ------
        DataIngestionError
            On an unreadable file, missing columns, no rows, missing cells
            (listing the offending row indices) or invalid ordinal codes.
    """
    try:
        frame = pd.read_csv(csv_filename, header=0)
    except pd.errors.EmptyDataError:
        raise DataIngestionError('{}: no rows'.format(csv_filename))
    except (OSError, pd.errors.ParserError) as e:
        raise DataIngestionError('{}: {}'.format(csv_filename, e))
    if len(frame) == 0:
        raise DataIngestionError('{}: no rows'.format(csv_filename))
    logger.debug('Read {} rows and {} columns from {}'.format(len(frame), len(frame.columns), csv_filename))
    return Dataset(frame, measurement.column_types)


def create_SemSpec(json_filename):
    spec = ss.SemSpec()
    spec.read_from_json(json_filename)
    return spec


def _read_json(filename):
    try:
        with open(filename) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SpecError('{}: line {}: {}'.format(filename, e.lineno, e.msg))


def create_StructuralSpec(json_filename, measurement):
    """
    Parse ``{"edges": [[from, to], ...]}`` into a StructuralSpec.
    """
    doc = _read_json(json_filename)
    if not isinstance(doc, dict) or 'edges' not in doc:
        raise SpecError('{}: a structure needs an "edges" list'.format(json_filename))
    return StructuralSpec.from_edges(measurement, [tuple(e) for e in doc['edges']])


def write_structure(structural, json_filename):
    doc = OrderedDict([('schema_version', SCHEMA_VERSION),
                       ('edges', [list(e) for e in structural.named_edges()])])
    with open(json_filename, 'w') as f:
        json.dump(doc, f, indent=2)


def create_Cpdag(json_filename, node_names):
    """Parse ``{"directed": [[a, b]], "undirected": [[a, b]]}`` over the given node names."""
    return Cpdag.from_json(_read_json(json_filename), node_names)


def write_cpdag(cpdag, node_names, json_filename):
    doc = OrderedDict([('schema_version', SCHEMA_VERSION)])
    doc.update(cpdag.to_json(node_names))
    with open(json_filename, 'w') as f:
        json.dump(doc, f, indent=2)
