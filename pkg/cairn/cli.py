#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

"""
Command line interface.

.. code-block:: none

    cairn search   --data D.csv --spec S.json [--config run.toml] [options]
    cairn fit      --data D.csv --spec S.json [--structure G.json]
    cairn simulate --scheme C3-5 --latents 4 --rows 1000 --replicates 20 --out sims
    cairn evaluate --run RUN --truth truth.json [--run RUN --truth truth.json ...]
    cairn plot     RUN

Exit codes: 0 success, 2 input error, 3 numeric failure, 4 too many failed subsets.
"""
import argparse
import json
import logging
import os
import sys
from collections import OrderedDict

from cairn.common import log
from cairn.common.errors import (DataIngestionError, DegenerateColumnError, DegenerateModelError, EstimationError,
                                 NoEstimateError, NumericDomainError, PartialRunError, SpecError)
from cairn.model_library.defn import ExogenousCovariance, IdaMethod, SCHEMA_VERSION
from cairn.models import pipeline
from cairn.models.simulation import SCHEMES

logger = logging.getLogger('cairn.cli')

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4


def _config_from_args(args):
    overrides = dict(data=getattr(args, 'data', None), spec=getattr(args, 'spec', None),
                     out=getattr(args, 'out', None), seed=args.seed, workers=getattr(args, 'workers', None),
                     pi_sel=getattr(args, 'pi_sel', None), subsets=getattr(args, 'subsets', None),
                     iterations=getattr(args, 'iterations', None), population=getattr(args, 'population', None),
                     crossover=getattr(args, 'crossover', None), mutation=getattr(args, 'mutation', None),
                     fraction=getattr(args, 'fraction', None),
                     exogenous_covariances=args.exogenous_covariances,
                     ida_method=getattr(args, 'ida_method', None))
    if args.covariance:
        overrides['use_covariance'] = True
    if getattr(args, 'no_plots', False):
        overrides['plots'] = False
    config = pipeline.load_config(args.config, **overrides)
    if config.data is None or config.spec is None:
        raise SpecError('Both --data and --spec (or "data" and "spec" in the configuration) are required')
    return config


def cmd_search(args):
    config = _config_from_args(args)
    run_dir, result = pipeline.search(config)
    with open(os.path.join(run_dir, 'relevant.txt')) as f:
        sys.stdout.write(f.read())
    print(run_dir)
    return EXIT_OK


def cmd_fit(args):
    config = _config_from_args(args)
    result, structural = pipeline.fit_single(config, args.structure)
    doc = OrderedDict([('schema_version', SCHEMA_VERSION),
                       ('edges', [list(e) for e in structural.named_edges()])])
    doc.update(result.to_dict())
    text = json.dumps(doc, indent=2)
    if args.output:
        with open(args.output, 'w') as f:
            f.write(text + '\n')
    else:
        print(text)
    if not result.converged:
        logger.warning('The fit did not converge: {}'.format(result.message))
    return EXIT_OK


def cmd_simulate(args):
    scheme = SCHEMES[args.scheme]
    dirs = pipeline.simulate_replicates(scheme, args.latents, args.rows, args.replicates, args.seed, args.out)
    for path in dirs:
        print(path)
    return EXIT_OK


def cmd_evaluate(args):
    rows, table = pipeline.evaluate_runs(args.run or [], args.truth or [], args.scheme, args.max_complexity)
    doc = OrderedDict([('schema_version', SCHEMA_VERSION), ('results', rows),
                       ('summary', table.to_dict('records'))])
    print(json.dumps(doc, indent=2, default=float))
    if args.table:
        table.to_csv(args.table, index=False)
    return EXIT_OK


def cmd_plot(args):
    from cairn.viz.generate_graphs import save_stability_graphs
    try:
        with open(os.path.join(args.run_dir, 'run_meta.json')) as f:
            meta = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SpecError('{}: not a run directory ({})'.format(args.run_dir, e))
    graphs = pipeline.read_stability(os.path.join(args.run_dir, 'stability.csv'), meta['nodes'])
    pi_sel = args.pi_sel if args.pi_sel is not None else meta['config']['pi_sel']
    for path in save_stability_graphs(graphs, os.path.join(args.run_dir, 'plots'), pi_sel, meta['pi_bic']['level']):
        print(path)
    return EXIT_OK


def _add_run_options(p):
    p.add_argument('--data', help='CSV dataset with a header row')
    p.add_argument('--spec', help='JSON model specification')
    p.add_argument('--config', help='TOML or JSON run configuration; flags override its values')
    p.add_argument('--covariance', action='store_true',
                   help='fit the sample covariance matrix (continuous data only)')
    p.add_argument('--exogenous-covariances', choices=[e.value for e in ExogenousCovariance],
                   help='covariances among exogenous nodes (default: free)')


def build_parser():
    parser = argparse.ArgumentParser(prog='cairn',
                                     description='Causal structure search among latent variables.')
    parser.add_argument('--json-logs', action='store_true', help='log JSON lines to standard error')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    parser.add_argument('-q', '--quiet', action='store_true')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('search', help='subsampled search, stability selection and total effects')
    _add_run_options(p)
    p.add_argument('--seed', type=int)
    p.add_argument('--out', help='parent of the run directory (default: runs)')
    p.add_argument('--workers', type=int, help='parallel subset searches (default: all cores)')
    p.add_argument('--pi-sel', type=float)
    p.add_argument('--subsets', type=int)
    p.add_argument('--iterations', type=int)
    p.add_argument('--population', type=int)
    p.add_argument('--crossover', type=float)
    p.add_argument('--mutation', type=float)
    p.add_argument('--fraction', type=float, help='share of the rows in every subset (default: 0.5)')
    p.add_argument('--ida-method', choices=[m.value for m in IdaMethod])
    p.add_argument('--no-plots', action='store_true')
    p.set_defaults(func=cmd_search)

    p = sub.add_parser('fit', help='maximum likelihood fit of one structure')
    _add_run_options(p)
    p.add_argument('--structure', help='JSON {"edges": [[from, to], ...]}; empty structure if omitted')
    p.add_argument('--seed', type=int)
    p.add_argument('--output', help='write the result here instead of standard output')
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser('simulate', help='random SEMs and data sets of a simulation scheme')
    p.add_argument('--scheme', choices=list(SCHEMES), default='C3-5')
    p.add_argument('--latents', type=int, default=4)
    p.add_argument('--rows', type=int, default=1000)
    p.add_argument('--replicates', type=int, default=20)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', default='simulations')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('evaluate', help='ROC/AUC of finished runs against true CPDAGs')
    p.add_argument('--run', action='append', help='run directory (repeatable)')
    p.add_argument('--truth', action='append', help='CPDAG JSON matching the preceding --run (repeatable)')
    p.add_argument('--scheme', default='custom', help='label used in the summary table')
    p.add_argument('--max-complexity', type=int)
    p.add_argument('--table', help='also write the mean-AUC table as CSV')
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser('plot', help='re-render the stability plots of a run')
    p.add_argument('run_dir')
    p.add_argument('--pi-sel', type=float)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    log.use_json_logs(args.json_logs)
    log.set_verbosity(-1 if args.quiet else args.verbose)
    try:
        return args.func(args)
    except (SpecError, DataIngestionError, DegenerateColumnError) as e:
        logger.error('Input error: {}'.format(e), extra={'event': 'error', 'exit_code': EXIT_INPUT})
        return EXIT_INPUT
    except OSError as e:
        logger.error('Input error: {}'.format(e), extra={'event': 'error', 'exit_code': EXIT_INPUT})
        return EXIT_INPUT
    except (NumericDomainError, DegenerateModelError, EstimationError, NoEstimateError) as e:
        logger.error('Numeric failure: {}'.format(e), extra={'event': 'error', 'exit_code': EXIT_NUMERIC})
        return EXIT_NUMERIC
    except PartialRunError as e:
        logger.error('Run incomplete: {}'.format(e), extra={'event': 'error', 'exit_code': EXIT_PARTIAL,
                                                            'completed': e.completed, 'requested': e.requested})
        return EXIT_PARTIAL


if __name__ == '__main__':
    sys.exit(main())
