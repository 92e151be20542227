import io
import json

import numpy as np
import pandas as pd
import pytest

from iic.closure import ClosureRequest, iic_close
from iic.config import Settings
from iic.estimate import Dataset
from iic.exceptions import InputError, SchemaViolation, UnknownNodeLabel
from iic.fixtures import get_fixture
from iic.graph import build_graph
from iic.seeds import EstimatorTag, SeedSpec, resolve_seeds
from iic import serialization as ser


def test_graph_document_round_trip_keeps_labels():
    g = get_fixture('iv_bow').graph
    doc = ser.graph_to_dict(g)
    assert doc['directed'] == [[0, 1], [1, 2], [3, 2]]
    assert doc['bidirected'] == [[1, 2], [2, 3]]
    assert ser.graph_from_dict(doc) == g


def test_integer_labels_are_not_written():
    doc = ser.graph_to_dict(build_graph(3, [(0, 1)]))
    assert 'labels' not in doc


def test_schema_violations_are_collected():
    with pytest.raises(SchemaViolation) as info:
        ser.graph_from_dict({'n': -1, 'directed': [[0]], 'extra': 1}, 'g.json')
    err = info.value
    assert err.source == 'g.json'
    assert len(err.errors) == 3
    assert all(e.startswith('Schema violation: ') for e in err.errors)
    assert str(err).startswith('g.json: Schema violation')
    assert '(+2 more)' in str(err)


def test_invalid_json(tmp_path):
    path = tmp_path / 'g.json'
    path.write_text('{"n": 3,', encoding='utf-8')
    with pytest.raises(InputError, match='invalid JSON'):
        ser.load_graph(path)


def test_seed_spec_by_label_or_index():
    g = get_fixture('iv_bow').graph
    spec = ser.seed_spec_from_dict(
        {'iv': [['Z', 'T', 2]], 'intervened': ['W'], 'prior': [{'edge': ['W', 'Y'], 'value': 0.5}]}, g,
    )
    assert spec.iv_triples == ((0, 1, 2),)
    assert spec.intervened == frozenset({3})
    assert spec.prior_edges == ((3, 2, 0.5),)
    assert ser.seed_spec_to_dict(spec, g) == {
        'iv': [['Z', 'T', 'Y']],
        'intervened': ['W'],
        'prior': [{'edge': ['W', 'Y'], 'value': 0.5}],
    }


def test_seed_spec_with_an_unknown_label():
    g = get_fixture('iv_bow').graph
    with pytest.raises(UnknownNodeLabel):
        ser.seed_spec_from_dict({'intervened': ['Q']}, g)


def test_witness_document():
    fx = get_fixture('six_node_estimation')
    g = fx.graph
    result = iic_close(ClosureRequest(graph=g, seed=resolve_seeds(g, fx.seeds)))
    doc = ser.witnesses_document(result, {'tool': 'iic test'})
    assert doc['meta'] == {'tool': 'iic test'}
    assert doc['iterations'] == 1
    entries = {e['edge']: e for e in doc['edges']}
    assert entries['W1->Y']['estimator'] == EstimatorTag.INTERVENTION.value
    assert 'witness' not in entries['W1->Y']
    reduced = entries['W2->Y']['witness']
    assert reduced['reduced'] is True
    assert reduced['known_parents'] == ['T', 'W1']
    assert reduced['sources'] == ['W3']
    assert reduced['treks'][0]['target'] == 'W2'
    json.dumps(doc)


def test_csv_header_lines(tmp_path):
    frame = pd.DataFrame({'a': [1, 2], 'b': [0.5, 0.25]})
    frame.attrs['mean'] = 1.5
    path = tmp_path / 'nested' / 'table.csv'
    header = ser.output_header('iic bench x', 7, Settings())
    ser.write_csv(frame, path, header)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0].startswith('# tool: iic ')
    assert lines[1] == '# rng_seed: 7'
    assert lines[2] == f'# config_hash: {Settings().digest()}'
    assert lines[3] == '# command: iic bench x'
    assert lines[4] == '# mean: 1.5'
    assert lines[5] == 'a,b'
    pd.testing.assert_frame_equal(ser.read_csv(path), frame)


def test_missing_rng_seed_is_written_as_none():
    assert ser.output_header('iic fixture', None, Settings())['rng_seed'] == 'none'


def test_dataset_regimes_by_label(tmp_path):
    g = get_fixture('iv_bow').graph
    path = tmp_path / 'data.csv'
    pd.DataFrame({
        'W': [0.1, 0.2, 0.3], 'Z': [1.0, 2.0, 3.0], 'T': [0.0, 0.0, 1.0], 'Y': [2.0, 1.0, 0.0],
        '__regime': ['-1', 'W', '3'],
    }).to_csv(path, index=False)
    data = ser.load_dataset(path, g)
    assert data.X[:, 0].tolist() == [1.0, 2.0, 3.0]
    assert data.regime.tolist() == [-1, 3, 3]


def test_dataset_errors(tmp_path):
    g = get_fixture('iv_bow').graph
    path = tmp_path / 'data.csv'
    pd.DataFrame({'Z': [1.0], 'T': [0.0]}).to_csv(path, index=False)
    with pytest.raises(InputError, match='Y, W'):
        ser.load_dataset(path, g)

    pd.DataFrame({'Z': [1.0], 'T': [np.nan], 'Y': [0.0], 'W': [0.0]}).to_csv(path, index=False)
    with pytest.raises(InputError):
        ser.load_dataset(path, g)


def test_dataset_dump_and_load(tmp_path):
    g = build_graph(2, [(0, 1)])
    data = Dataset(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([-1, 0]))
    path = tmp_path / 'd.csv'
    ser.dump_dataset(data, g, path, {'tool': 'iic'})
    loaded = ser.load_dataset(path, g)
    assert np.array_equal(loaded.X, data.X)
    assert loaded.regime.tolist() == [-1, 0]


def test_seed_spec_file_on_stdin(monkeypatch):
    g = get_fixture('iv_bow').graph
    monkeypatch.setattr('sys.stdin', io.StringIO('{"exogenous": true}'))
    assert ser.load_seed_spec('-', g) == SeedSpec(exogenous=True)
