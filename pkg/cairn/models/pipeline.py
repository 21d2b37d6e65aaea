#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
End-to-end analyses: the subsampled search with stability selection and
effect estimation, a single fit, simulation replicates and ROC evaluation,
together with the run configuration and the files a run writes.

All randomness of a run derives from its seed through
``numpy.random.SeedSequence``: one child stream for identification and
subsampling, one per subset search and one per subset for factor-score
sampling. Results do not depend on the number of workers.
"""
import json
import logging
import os
import sys
import time
from collections import OrderedDict, namedtuple
from dataclasses import dataclass, field, fields

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

import cairn.parsers.dataset_parser as dataset_parser
from cairn.common.errors import (DegenerateColumnError, DegenerateModelError, EstimationError, NoEstimateError,
                                 NumericDomainError, PartialRunError, SpecError)
from cairn.model_library.correlations.polycorr import mixed_correlation_matrix
from cairn.model_library.defn import (ExogenousCovariance, IdaMethod, MatrixKind, SCHEMA_VERSION, StabilityKind)
from cairn.model_library.graphs.dag import Dag, dag_to_cpdag
from cairn.model_library.sem.identification import build_pattern, identify_measurement
from cairn.model_library.sem.structure import StructuralSpec
from cairn.models.effects import SubsetScores, estimate_total_effects, subset_scores
from cairn.models.estimator import FitOptions, fit
from cairn.models.evaluation import mean_auc_table, roc_auc
from cairn.models.search import SearchParams, evolve
from cairn.models.simulation import scheme_dataset
from cairn.models.stability import (StabilityGraph, accumulate, causal_path_stability, edge_stability, pi_bic,
                                    relevant_structures, subsample_indices)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger('cairn.models.pipeline')

# numeric failures of a single subset; anything else aborts the run
_SUBSET_ERRORS = (NumericDomainError, DegenerateModelError, DegenerateColumnError, EstimationError)


def _default_workers():
    return os.cpu_count() or 1


@dataclass
class RunConfig:
    data: str = None
    spec: str = None
    out: str = 'runs'
    subsets: int = 25
    iterations: int = 30
    population: int = 50
    crossover: float = 0.45
    mutation: float = 0.01
    pi_sel: float = 0.6
    fraction: float = 0.5
    seed: int = 0
    workers: int = field(default_factory=_default_workers)
    exogenous_covariances: str = ExogenousCovariance.FREE.value
    use_covariance: bool = False
    plots: bool = True
    ida_method: str = IdaMethod.LOCAL.value
    min_completed: float = 0.8
    maxiter: int = 500

    def validate(self):
        if self.subsets < 1:
            raise SpecError('Number of subsets must be positive, got {}'.format(self.subsets))
        if not 0. < self.pi_sel <= 1.:
            raise SpecError('pi_sel must lie in (0, 1], got {}'.format(self.pi_sel))
        if not 0. < self.fraction <= 1.:
            raise SpecError('Subsample fraction must lie in (0, 1], got {}'.format(self.fraction))
        if not 0. <= self.min_completed <= 1.:
            raise SpecError('min_completed must lie in [0, 1], got {}'.format(self.min_completed))
        if self.workers == 0:
            raise SpecError('Worker count must be nonzero')
        try:
            ExogenousCovariance(self.exogenous_covariances)
            IdaMethod(self.ida_method)
        except ValueError as e:
            raise SpecError(str(e))
        self.search_params(0)
        return self

    @property
    def exogenous_policy(self):
        return ExogenousCovariance(self.exogenous_covariances)

    @property
    def ida(self):
        return IdaMethod(self.ida_method)

    def search_params(self, seed):
        return SearchParams(population=self.population, iterations=self.iterations, crossover=self.crossover,
                            mutation=self.mutation, seed=seed)

    def fit_options(self):
        return FitOptions(maxiter=self.maxiter)

    def to_dict(self):
        return OrderedDict((f.name, getattr(self, f.name)) for f in fields(self))


def load_config(filename=None, **overrides):
    """
    RunConfig from a TOML or JSON file, with keyword overrides (None values are ignored).

    Raises
    ------
        SpecError
            On an unreadable file, unknown keys or invalid values.
    """
    values = dict()
    if filename is not None:
        try:
            if filename.endswith('.toml'):
                with open(filename, 'rb') as f:
                    values = tomllib.load(f)
            else:
                with open(filename) as f:
                    values = json.load(f)
        except tomllib.TOMLDecodeError as e:
            raise SpecError('{}: {}'.format(filename, e))
        except json.JSONDecodeError as e:
            raise SpecError('{}: line {}: {}'.format(filename, e.lineno, e.msg))
        except OSError as e:
            raise SpecError('{}: {}'.format(filename, e))
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise SpecError('Unknown configuration keys: {}'.format(', '.join(unknown)))
    values.update((k, v) for k, v in overrides.items() if v is not None)
    return RunConfig(**values).validate()


SubsetOutcome = namedtuple('SubsetOutcome', ['index', 'rows', 'front', 'matrix_kind', 'repaired', 'error'])


@dataclass(frozen=True, eq=False)
class SearchResult:
    measurement: object
    prior: object
    identification: object
    outcomes: tuple
    edge: StabilityGraph
    causal_path: StabilityGraph
    pi_bic: object
    relevant: list
    effects: list

    @property
    def fronts(self):
        return [o.front for o in self.outcomes]

    @property
    def completed(self):
        return sum(o.front is not None for o in self.outcomes)


def _seed_of(seed_sequence):
    return int(seed_sequence.generate_state(1)[0])


def _search_subset(index, d, rows, measurement, identification, prior, params, options, policy, use_covariance):
    sub = d.take(rows)
    try:
        corr = mixed_correlation_matrix(sub, use_covariance)
        front = evolve(corr.matrix, sub.n_rows, measurement, identification, prior, params, options, policy,
                       subset_index=index)
    except _SUBSET_ERRORS as e:
        return SubsetOutcome(index, rows, None, None, False, '{}: {}'.format(type(e).__name__, e))
    return SubsetOutcome(index, rows, front, corr.kind, corr.repaired, None)


def run_search(config, d, measurement, prior):
    """
    Search on subsamples, stability selection and total effects.

    Parameters
    ----------
    config : RunConfig
    d : Dataset
    measurement : MeasurementSpec
    prior : PriorKnowledge

    Returns
    -------
        SearchResult

    Raises
    ------
        PartialRunError
            If fewer than ``config.min_completed`` of the subsets finish.
    """
    root = np.random.SeedSequence(config.seed)
    setup_seq, search_seq, effects_seq = root.spawn(3)
    rng = np.random.default_rng(setup_seq)

    identification = identify_measurement(measurement, StructuralSpec.empty(measurement), rng, prior)
    prior = prior.with_required(identification.added_edges)
    rows = subsample_indices(d.n_rows, config.subsets, rng, config.fraction)
    search_seeds = [_seed_of(s) for s in search_seq.spawn(config.subsets)]
    policy = config.exogenous_policy
    options = config.fit_options()

    logger.info('Searching {} subsets of {} rows ({} workers)'.format(config.subsets, len(rows[0]), config.workers))
    jobs = (delayed(_search_subset)(k, d, rows[k], measurement, identification, prior,
                                    config.search_params(search_seeds[k]), options, policy, config.use_covariance)
            for k in range(config.subsets))
    outcomes = []
    for outcome in Parallel(n_jobs=config.workers, return_as='generator')(jobs):
        outcomes.append(outcome)
        if outcome.error is None:
            logger.info('Subset {} of {} complete: {} complexity levels'.format(
                len(outcomes), config.subsets, len(outcome.front.best_by_complexity)),
                extra={'event': 'subset_done', 'subset': outcome.index,
                       'levels': outcome.front.complexities()})
        else:
            logger.warning('Subset {} failed: {}'.format(outcome.index, outcome.error),
                           extra={'event': 'subset_failed', 'subset': outcome.index})

    completed = sum(o.front is not None for o in outcomes)
    if completed < config.min_completed * config.subsets or completed == 0:
        raise PartialRunError('Only {} of {} subsets completed'.format(completed, config.subsets),
                              completed=completed, requested=config.subsets)

    fronts = [o.front for o in outcomes]
    bag = accumulate(fronts)
    names = measurement.node_names
    edge_g = edge_stability(bag, names)
    path_g = causal_path_stability(bag, names)
    threshold = pi_bic(fronts)
    relevant = relevant_structures(edge_g, path_g, config.pi_sel, threshold)

    effects_rngs = [np.random.default_rng(s) for s in effects_seq.spawn(config.subsets)]
    scored = Parallel(n_jobs=config.workers, prefer='threads')(
        delayed(_subset_scores)(o, d, measurement, threshold.level, effects_rngs[o.index]) for o in outcomes)
    scored = [s for s in scored if s is not None]
    effects = estimate_total_effects(relevant, scored, measurement, config.ida)

    return SearchResult(measurement, prior, identification, tuple(outcomes), edge_g, path_g, threshold, relevant,
                        effects)


def _subset_scores(outcome, d, measurement, level, rng):
    if outcome.front is None or level not in outcome.front.best_by_complexity:
        return None
    member = outcome.front.best_by_complexity[level]
    cpdag = dag_to_cpdag(Dag.from_adjacency(member.structure.adjacency))
    values = d.take(outcome.rows).values()
    try:
        scores = subset_scores(member.fit.theta_hat, measurement, values, rng,
                               standardize=outcome.matrix_kind != MatrixKind.COVARIANCE)
    except DegenerateModelError as e:
        logger.warning('No factor scores for subset {}: {}'.format(outcome.index, e))
        return None
    return SubsetScores(outcome.index, cpdag, scores)


def make_run_dir(out, seed):
    """Create a fresh directory ``<out>/<timestamp>_seed<seed>``; never reuses an existing one."""
    base = os.path.join(out, '{}_seed{}'.format(time.strftime('%Y%m%d-%H%M%S'), seed))
    path, k = base, 1
    while True:
        try:
            os.makedirs(path)
            return path
        except FileExistsError:
            path = '{}-{}'.format(base, k)
            k += 1


def _dump_json(doc, filename):
    with open(filename, 'w') as f:
        json.dump(doc, f, indent=2)
        f.write('\n')


def _versions():
    import joblib
    import networkx
    import scipy
    import sklearn
    from importlib import metadata
    try:
        cairn_version = metadata.version('cairn')
    except metadata.PackageNotFoundError:
        cairn_version = 'unknown'
    return OrderedDict([('cairn', cairn_version), ('python', sys.version.split()[0]), ('numpy', np.__version__),
                        ('scipy', scipy.__version__), ('pandas', pd.__version__),
                        ('networkx', networkx.__version__), ('joblib', joblib.__version__),
                        ('scikit-learn', sklearn.__version__)])


def stability_frame(edge_g, path_g):
    return pd.DataFrame(edge_g.to_rows() + path_g.to_rows(),
                        columns=['pair', 'kind', 'complexity', 'probability', 'n_models'])


def read_stability(filename, node_names):
    """(edge, causal path) StabilityGraphs from a stability CSV."""
    rows = pd.read_csv(filename).to_dict('records')
    return (StabilityGraph.from_rows(rows, StabilityKind.EDGE, node_names),
            StabilityGraph.from_rows(rows, StabilityKind.CAUSAL_PATH, node_names))


def relevant_document(result, pi_sel):
    effects = {(e.source, e.target): e for e in result.effects}
    structures = []
    for s in result.relevant:
        entry = OrderedDict([('from', s.pair[0]), ('to', s.pair[1]), ('kind', s.kind.value),
                             ('direction', s.direction.value), ('reliability', s.reliability),
                             ('edge_reliability', s.edge_reliability)])
        effect = effects.get(tuple(s.pair))
        entry['total_effect'] = effect.total if effect is not None else None
        entry['label'] = effect.label() if effect is not None else '{:.2f}'.format(s.reliability)
        structures.append(entry)
    return OrderedDict([('schema_version', SCHEMA_VERSION), ('pi_sel', pi_sel),
                        ('pi_bic', result.pi_bic.level), ('structures', structures)])


def relevant_text(doc):
    lines = ['pi_sel = {}, pi_bic = {}'.format(doc['pi_sel'], doc['pi_bic'])]
    for s in doc['structures']:
        sep = ' -> ' if s['direction'] == 'directed' else ' -- '
        lines.append('{}{}{}  {}'.format(s['from'], sep, s['to'], s['label']))
    return '\n'.join(lines) + '\n'


def write_search_outputs(result, config, run_dir, n_rows, started=None):
    """
    Write the files of a search run.

    stability.csv, stability.json, relevant.json, relevant.txt, effects.json
    and fronts.json depend only on the configuration and the data;
    run_meta.json also records timing and package versions.

    Returns
    -------
        list of str
    """
    frame = stability_frame(result.edge, result.causal_path)
    frame.to_csv(os.path.join(run_dir, 'stability.csv'), index=False, float_format='%.6f')
    _dump_json(OrderedDict([('schema_version', SCHEMA_VERSION),
                            ('edge', result.edge.to_dict()),
                            ('causal_path', result.causal_path.to_dict())]),
               os.path.join(run_dir, 'stability.json'))

    doc = relevant_document(result, config.pi_sel)
    _dump_json(doc, os.path.join(run_dir, 'relevant.json'))
    with open(os.path.join(run_dir, 'relevant.txt'), 'w') as f:
        f.write(relevant_text(doc))
    _dump_json(OrderedDict([('schema_version', SCHEMA_VERSION), ('method', config.ida_method),
                            ('effects', [e.to_dict() for e in result.effects])]),
               os.path.join(run_dir, 'effects.json'))

    fronts = []
    for o in result.outcomes:
        if o.front is None:
            continue
        levels = OrderedDict()
        for c, m in o.front.best_by_complexity.items():
            levels[str(c)] = OrderedDict([('chi_square', m.chi_square), ('t', m.t), ('bic', m.fit.bic),
                                          ('edges', [list(e) for e in m.structure.named_edges()])])
        fronts.append(OrderedDict([('subset', o.index), ('levels', levels)]))
    _dump_json(OrderedDict([('schema_version', SCHEMA_VERSION), ('fronts', fronts)]),
               os.path.join(run_dir, 'fronts.json'))

    names = result.measurement.node_names
    ident = result.identification
    indicators = result.measurement.indicator_names
    meta = OrderedDict([
        ('schema_version', SCHEMA_VERSION),
        ('config', config.to_dict()),
        ('nodes', list(names)),
        ('n_rows', n_rows),
        ('subset_rows', len(result.outcomes[0].rows) if result.outcomes else 0),
        ('decisions', OrderedDict([
            ('exogenous_covariances', config.exogenous_covariances),
            ('ida_method', config.ida_method),
            ('matrix', MatrixKind.COVARIANCE.value if config.use_covariance else MatrixKind.CORRELATION.value),
            ('fraction', config.fraction),
            ('min_completed', config.min_completed),
            ('effects_at', 'pi_bic'),
            ('stability_representative', 'best chi-square per subset and complexity'),
        ])),
        ('identification', OrderedDict([
            ('markers', OrderedDict((names[k], indicators[i]) for k, i in enumerate(ident.markers))),
            ('zero_error', sorted(indicators[i] for i in ident.zero_error)),
            ('added_edges', [[names[a], names[b]] for a, b in ident.added_edges]),
        ])),
        ('prior', result.prior.to_dict()),
        ('pi_bic', OrderedDict([('level', result.pi_bic.level),
                                ('medians', OrderedDict((str(c), v) for c, v in result.pi_bic.medians.items())),
                                ('support', OrderedDict((str(c), v) for c, v in result.pi_bic.support.items())),
                                ('underpopulated', result.pi_bic.underpopulated)])),
        ('subsets', OrderedDict([('requested', len(result.outcomes)), ('completed', result.completed),
                                 ('failed', [OrderedDict([('subset', o.index), ('error', o.error)])
                                             for o in result.outcomes if o.error is not None]),
                                 ('repaired', [o.index for o in result.outcomes if o.repaired])])),
        ('versions', _versions()),
    ])
    if started is not None:
        meta['started'] = time.strftime('%Y-%m-%dT%H:%M:%S', time.localtime(started))
        meta['elapsed_seconds'] = round(time.time() - started, 3)
    _dump_json(meta, os.path.join(run_dir, 'run_meta.json'))

    written = ['stability.csv', 'stability.json', 'relevant.json', 'relevant.txt', 'effects.json', 'fronts.json',
               'run_meta.json']
    if config.plots:
        from cairn.viz.generate_graphs import save_stability_graphs
        written += [os.path.relpath(p, run_dir) for p in save_stability_graphs(
            [result.edge, result.causal_path], os.path.join(run_dir, 'plots'), config.pi_sel, result.pi_bic.level)]
    return written


def search(config):
    """
    Read the inputs named by ``config``, run the analysis and write a new run directory.

    Returns
    -------
        (str, SearchResult)
    """
    started = time.time()
    spec = dataset_parser.create_SemSpec(config.spec)
    measurement = spec.measurement()
    prior = spec.prior(measurement)
    d = dataset_parser.create_Dataset(config.data, measurement)
    result = run_search(config, d, measurement, prior)
    run_dir = make_run_dir(config.out, config.seed)
    write_search_outputs(result, config, run_dir, d.n_rows, started)
    logger.info('Wrote {}'.format(run_dir), extra={'event': 'run_done', 'run_dir': run_dir})
    return run_dir, result


def fit_single(config, structure=None):
    """
    Fit one structure (the empty one by default) to the full dataset.

    Returns
    -------
        (FitResult, StructuralSpec)
    """
    spec = dataset_parser.create_SemSpec(config.spec)
    measurement = spec.measurement()
    prior = spec.prior(measurement)
    d = dataset_parser.create_Dataset(config.data, measurement)
    if structure is None:
        structural = StructuralSpec.empty(measurement)
    else:
        structural = dataset_parser.create_StructuralSpec(structure, measurement)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])
    identification = identify_measurement(measurement, structural, rng, prior)
    for i, j in identification.added_edges:
        structural = structural.with_edge(i, j)
    corr = mixed_correlation_matrix(d, config.use_covariance)
    pattern = build_pattern(measurement, structural, identification, config.exogenous_policy)
    return fit(pattern, corr.matrix, d.n_rows, config.fit_options()), structural


def simulate_replicates(scheme, n_latents, N, replicates, seed, out):
    """
    Write ``replicates`` simulated datasets of a scheme under ``out``.

    Each ``replicate_<k>`` directory holds data.csv, spec.json (model
    specification typed after discretization), truth.json (CPDAG of the
    true structure), parameters.json and scheme.json.

    Returns
    -------
        list of str
            The replicate directories.
    """
    dirs = []
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(replicates)):
        rng = np.random.default_rng(child)
        sem, d, spec = scheme_dataset(scheme, n_latents, N, rng)
        path = os.path.join(out, 'replicate_{:03d}'.format(k))
        os.makedirs(path, exist_ok=True)
        d.to_csv(os.path.join(path, 'data.csv'))
        spec.write_to_json(os.path.join(path, 'spec.json'))
        dataset_parser.write_cpdag(sem.truth, sem.measurement.node_names, os.path.join(path, 'truth.json'))
        dataset_parser.write_structure(sem.structural, os.path.join(path, 'structure.json'))
        _dump_json(OrderedDict([('schema_version', SCHEMA_VERSION),
                                ('parameters', sem.params.named_values(free_only=False))]),
                   os.path.join(path, 'parameters.json'))
        meta = scheme.to_dict()
        meta.update([('schema_version', SCHEMA_VERSION), ('n_latents_used', n_latents), ('N', N),
                     ('replicate', k), ('seed', seed)])
        _dump_json(meta, os.path.join(path, 'scheme.json'))
        dirs.append(path)
        logger.info('Simulated replicate {} of {}'.format(k + 1, replicates),
                    extra={'event': 'replicate_done', 'replicate': k})
    return dirs


def evaluate_runs(run_dirs, truth_files, scheme='custom', max_complexity=None):
    """
    ROC of the stability graphs of finished runs against true CPDAGs.

    Returns
    -------
        (list of dict, pandas.DataFrame)
            One row per run and kind, and the mean-AUC table.
    """
    if len(run_dirs) != len(truth_files):
        raise SpecError('Got {} runs but {} truth files'.format(len(run_dirs), len(truth_files)))
    rows = []
    for run_dir, truth_file in zip(run_dirs, truth_files):
        with open(os.path.join(run_dir, 'run_meta.json')) as f:
            meta = json.load(f)
        names = meta['nodes']
        truth = dataset_parser.create_Cpdag(truth_file, names)
        for graph in read_stability(os.path.join(run_dir, 'stability.csv'), names):
            try:
                result = roc_auc(graph, truth, max_complexity)
            except NoEstimateError as e:
                logger.warning('{}: {} skipped: {}'.format(run_dir, graph.kind.value, e))
                continue
            row = OrderedDict([('run', run_dir), ('scheme', scheme), ('kind', graph.kind.value),
                               ('N', meta.get('n_rows'))])
            row.update(result.to_dict())
            rows.append(row)
    return rows, mean_auc_table(rows)
