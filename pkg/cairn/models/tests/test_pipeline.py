#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

'''
run configuration and end-to-end pipeline tests
'''
import json
import os
from collections import OrderedDict

import numpy as np
import pandas as pd
import pytest

import cairn.models.pipeline as pipeline
from cairn.common.errors import PartialRunError, SpecError
from cairn.data.sem_spec import SemSpec
from cairn.model_library.defn import ExogenousCovariance, StabilityKind
from cairn.model_library.sem.identification import build_pattern, identify_measurement
from cairn.model_library.sem.structure import CONTINUOUS, MeasurementSpec, StructuralSpec
from cairn.models.simulation import SCHEMES, simulate


def _two_latent_sem():
    indicators = OrderedDict((name, name[0].upper()) for name in ('a1', 'a2', 'a3', 'b1', 'b2', 'b3'))
    measurement = MeasurementSpec(('A', 'B'), indicators, {name: CONTINUOUS for name in indicators})
    structural = StructuralSpec.from_edges(measurement, [('A', 'B')])
    ident = identify_measurement(measurement, structural, np.random.default_rng(0))
    pattern = build_pattern(measurement, structural, ident, ExogenousCovariance.ZERO)
    params = pattern.with_matrices({'Gamma': np.array([[0.7]]), 'Phi': np.eye(1), 'Psi': np.array([[0.5]]),
                                    'LambdaX': np.array([[1.], [0.8], [1.2]]),
                                    'LambdaY': np.array([[1.], [0.9], [1.1]]),
                                    'ThetaDelta': 0.4 * np.eye(3), 'ThetaEpsilon': 0.4 * np.eye(3)})
    return measurement, params


@pytest.fixture
def inputs(tmp_path):
    measurement, params = _two_latent_sem()
    d = simulate(measurement, params, 200, np.random.default_rng(11))
    data = os.path.join(str(tmp_path), 'data.csv')
    spec = os.path.join(str(tmp_path), 'spec.json')
    d.to_csv(data)
    SemSpec.from_specs(measurement).write_to_json(spec)
    return data, spec


def _config(inputs, tmp_path, **kwargs):
    data, spec = inputs
    values = dict(data=data, spec=spec, out=os.path.join(str(tmp_path), 'runs'), subsets=3, population=4,
                  iterations=2, workers=1, plots=False, exogenous_covariances='zero', seed=5)
    values.update(kwargs)
    return pipeline.load_config(**values)


class TestConfig:
    def test_defaults(self):
        config = pipeline.load_config()
        assert config.subsets == 25
        assert config.population == 50
        assert config.iterations == 30
        assert config.crossover == 0.45
        assert config.mutation == 0.01
        assert config.pi_sel == 0.6
        assert config.fraction == 0.5
        assert config.exogenous_policy == ExogenousCovariance.FREE

    def test_toml(self, tmp_path):
        filename = os.path.join(str(tmp_path), 'run.toml')
        with open(filename, 'w') as f:
            f.write('subsets = 10\npi_sel = 0.7\nexogenous_covariances = "zero"\n')
        config = pipeline.load_config(filename, subsets=12, seed=None)
        assert config.subsets == 12
        assert config.pi_sel == 0.7
        assert config.seed == 0
        assert config.exogenous_policy == ExogenousCovariance.ZERO

    def test_json(self, tmp_path):
        filename = os.path.join(str(tmp_path), 'run.json')
        with open(filename, 'w') as f:
            json.dump({'iterations': 3, 'ida_method': 'global'}, f)
        config = pipeline.load_config(filename)
        assert config.iterations == 3
        assert config.to_dict()['ida_method'] == 'global'

    @pytest.mark.parametrize('values', [{'pi_sel': 0.}, {'subsets': 0}, {'fraction': 1.5}, {'population': 3},
                                        {'exogenous_covariances': 'some'}, {'ida_method': 'exact'},
                                        {'mutation': -0.1}])
    def test_invalid_values(self, values):
        with pytest.raises(SpecError):
            pipeline.load_config(**values)

    def test_unknown_key(self, tmp_path):
        filename = os.path.join(str(tmp_path), 'run.json')
        with open(filename, 'w') as f:
            json.dump({'generations': 3}, f)
        with pytest.raises(SpecError, match='generations'):
            pipeline.load_config(filename)

    def test_unreadable(self, tmp_path):
        with pytest.raises(SpecError):
            pipeline.load_config(os.path.join(str(tmp_path), 'absent.toml'))
        filename = os.path.join(str(tmp_path), 'bad.toml')
        with open(filename, 'w') as f:
            f.write('subsets = = 3\n')
        with pytest.raises(SpecError):
            pipeline.load_config(filename)


def _summary(result):
    return (sorted(result.edge.values.items()), sorted(result.causal_path.values.items()), result.pi_bic.level,
            [(s.pair, s.direction) for s in result.relevant], [(e.source, e.target, e.total) for e in result.effects])


def test_run_search_is_deterministic(inputs, tmp_path):
    config = _config(inputs, tmp_path)
    spec = SemSpec()
    spec.read_from_json(config.spec)
    measurement = spec.measurement()
    from cairn.parsers.dataset_parser import create_Dataset
    d = create_Dataset(config.data, measurement)
    first = pipeline.run_search(config, d, measurement, spec.prior(measurement))
    second = pipeline.run_search(config, d, measurement, spec.prior(measurement))
    assert first.completed == 3
    assert _summary(first) == _summary(second)
    threaded = pipeline.run_search(_config(inputs, tmp_path, workers=2), d, measurement, spec.prior(measurement))
    assert _summary(first) == _summary(threaded)


def test_search_writes_run_directory(inputs, tmp_path):
    run_dir, result = pipeline.search(_config(inputs, tmp_path))
    for name in ('stability.csv', 'stability.json', 'relevant.json', 'relevant.txt', 'effects.json', 'fronts.json',
                 'run_meta.json'):
        assert os.path.isfile(os.path.join(run_dir, name))
    assert not os.path.exists(os.path.join(run_dir, 'plots'))
    with open(os.path.join(run_dir, 'run_meta.json')) as f:
        meta = json.load(f)
    assert meta['nodes'] == ['A', 'B']
    assert meta['n_rows'] == 200
    assert meta['subset_rows'] == 100
    assert meta['subsets']['completed'] == 3
    assert meta['pi_bic']['level'] == result.pi_bic.level
    assert meta['identification']['markers'] == {'A': 'a1', 'B': 'b1'}
    with open(os.path.join(run_dir, 'relevant.txt')) as f:
        assert f.readline().startswith('pi_sel = 0.6, pi_bic = ')

    edge, path = pipeline.read_stability(os.path.join(run_dir, 'stability.csv'), ['A', 'B'])
    assert edge.kind == StabilityKind.EDGE
    assert edge.levels == result.edge.levels
    for key, value in result.causal_path.values.items():
        assert path.values[key] == pytest.approx(value, abs=1e-6)

    # the same seed never overwrites an earlier run
    second_dir, _ = pipeline.search(_config(inputs, tmp_path))
    assert second_dir != run_dir


def test_every_subset_failing(inputs, tmp_path):
    data, spec = inputs
    frame = pd.read_csv(data)
    frame['b3'] = 1.
    frame.to_csv(data, index=False)
    with pytest.raises(PartialRunError) as info:
        pipeline.search(_config(inputs, tmp_path))
    assert info.value.completed == 0
    assert info.value.requested == 3


def test_make_run_dir(tmp_path):
    first = pipeline.make_run_dir(str(tmp_path), 3)
    second = pipeline.make_run_dir(str(tmp_path), 3)
    assert os.path.isdir(first) and os.path.isdir(second)
    assert first != second
    assert os.path.basename(first).endswith('_seed3')


def test_fit_single(inputs, tmp_path):
    data, spec = inputs
    structure = os.path.join(str(tmp_path), 'g.json')
    with open(structure, 'w') as f:
        json.dump({'edges': [['A', 'B']]}, f)
    config = _config(inputs, tmp_path)
    result, structural = pipeline.fit_single(config, structure)
    assert structural.named_edges() == [('A', 'B')]
    assert result.converged
    empty, _ = pipeline.fit_single(config)
    assert empty.chi_square > result.chi_square


def test_simulate_and_evaluate(tmp_path):
    out = os.path.join(str(tmp_path), 'sims')
    dirs = pipeline.simulate_replicates(SCHEMES['C3-5'], 3, 200, 1, 4, out)
    assert len(dirs) == 1
    for name in ('data.csv', 'spec.json', 'truth.json', 'structure.json', 'parameters.json', 'scheme.json'):
        assert os.path.isfile(os.path.join(dirs[0], name))
    config = pipeline.load_config(data=os.path.join(dirs[0], 'data.csv'), spec=os.path.join(dirs[0], 'spec.json'),
                                  out=os.path.join(str(tmp_path), 'runs'), subsets=2, population=4, iterations=1,
                                  workers=1, plots=False, exogenous_covariances='zero', min_completed=0.)
    run_dir, _ = pipeline.search(config)
    # three latents simulate a complete DAG; a collider truth has both classes for both kinds
    truth = os.path.join(str(tmp_path), 'collider.json')
    with open(truth, 'w') as f:
        json.dump({'directed': [['L1', 'L3'], ['L2', 'L3']]}, f)
    rows, table = pipeline.evaluate_runs([run_dir], [truth], 'C3-5')
    assert sorted(r['kind'] for r in rows) == ['causal_path', 'edge']
    assert all(0. <= r['auc'] <= 1. for r in rows)
    assert all(r['N'] == 200 for r in rows)
    assert list(table['scheme']) == ['C3-5'] * len(table)
    with pytest.raises(SpecError):
        pipeline.evaluate_runs([run_dir], [])


@pytest.mark.slow
def test_recovery_on_simulated_replicates(tmp_path):
    out = os.path.join(str(tmp_path), 'sims')
    dirs = pipeline.simulate_replicates(SCHEMES['C3-5'], 4, 1000, 10, 3, out)
    runs = []
    for path in dirs:
        config = pipeline.load_config(data=os.path.join(path, 'data.csv'), spec=os.path.join(path, 'spec.json'),
                                      out=os.path.join(str(tmp_path), 'runs'), subsets=10, population=50,
                                      iterations=30, plots=False, exogenous_covariances='zero', seed=1)
        runs.append(pipeline.search(config)[0])
    rows, _ = pipeline.evaluate_runs(runs, [os.path.join(path, 'truth.json') for path in dirs], 'C3-5')
    edge = [r['auc'] for r in rows if r['kind'] == StabilityKind.EDGE.value]
    causal = [r['auc'] for r in rows if r['kind'] == StabilityKind.CAUSAL_PATH.value]
    assert edge and causal
    assert np.mean(edge) >= 0.8
    assert np.mean(causal) >= 0.7
