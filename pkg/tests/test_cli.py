import io
import json

import pandas as pd
import pytest

from iic.cli import main


def _fixture_files(tmp_path, name):
    graph, seeds = tmp_path / f'{name}.json', tmp_path / f'{name}_seeds.json'
    assert main(['fixture', name, '--out', str(graph), '--seeds-out', str(seeds)]) == 0
    return graph, seeds


def _write(tmp_path, doc, name='graph.json'):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding='utf-8')
    return path


def test_no_command_prints_help(capsys):
    assert main([]) == 0
    assert 'classify' in capsys.readouterr().out


def test_fixture_listing_and_json(capsys):
    assert main(['fixture']) == 0
    names = capsys.readouterr().out.split()
    assert 'iv_bow' in names and 'six_node_estimation' in names

    assert main(['fixture', 'iv_bow']) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc['n'] == 4
    assert doc['labels'] == {'0': 'Z', '1': 'T', '2': 'Y', '3': 'W'}
    assert doc['name'] == 'iv_bow'


def test_unknown_fixture(capsys):
    assert main(['fixture', 'fig99']) == 1
    assert 'unknown fixture' in capsys.readouterr().err


def test_classify_with_seeds(tmp_path):
    graph, seeds = _fixture_files(tmp_path, 'mr')
    out = tmp_path / 'edges.csv'
    assert main(['-q', 'classify', str(graph), '--seeds', str(seeds), '--out', str(out)]) == 0
    assert out.read_text(encoding='utf-8').startswith('# tool: iic')
    table = pd.read_csv(out, comment='#')
    assert list(table.columns) == ['edge', 'status', 'rule', 'iteration', 'witness_sources']
    assert (table['status'] == 'Identified').sum() == 9
    assert len(table) == 13


def test_classify_to_stdout_and_summary(tmp_path, capsys):
    graph, seeds = _fixture_files(tmp_path, 'iv_bow')
    assert main(['classify', '--graph', str(graph), '--seeds', str(seeds)]) == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert lines[0].startswith('# tool: iic')
    assert any(line.startswith('T->Y,Identified,Seed') for line in lines)
    assert 'Classification summary' in captured.err


def test_classify_reads_the_graph_from_stdin(tmp_path, monkeypatch, capsys):
    graph, _ = _fixture_files(tmp_path, 'iv_bow')
    monkeypatch.setattr('sys.stdin', io.StringIO(graph.read_text(encoding='utf-8')))
    assert main(['-q', 'classify', '-']) == 0
    out = capsys.readouterr().out
    assert 'Z->T,Identified,HTC' in out
    assert 'T->Y,Inconclusive' in out


def test_graph_and_seeds_cannot_both_use_stdin(tmp_path, monkeypatch, capsys):
    graph, _ = _fixture_files(tmp_path, 'iv_bow')
    monkeypatch.setattr('sys.stdin', io.StringIO(graph.read_text(encoding='utf-8')))
    assert main(['classify', '-', '--seeds', '-']) == 2
    assert 'stdin' in capsys.readouterr().err


def test_emit_witnesses(tmp_path):
    graph, seeds = _fixture_files(tmp_path, 'iv_bow')
    witnesses = tmp_path / 'witnesses.json'
    assert main(['-q', 'classify', str(graph), '--seeds', str(seeds), '--out', str(tmp_path / 'e.csv'),
                 '--emit-witnesses', str(witnesses)]) == 0
    doc = json.loads(witnesses.read_text(encoding='utf-8'))
    entries = {e['edge']: e for e in doc['edges']}
    assert entries['T->Y']['rule'] == 'Seed'
    assert entries['T->Y']['estimator'] == 'IvRatio'
    assert entries['Z->T']['witness']['node'] == 'T'
    assert doc['meta']['tool'].startswith('iic')


def test_missing_graph_file_is_a_usage_error(tmp_path, capsys):
    assert main(['classify', str(tmp_path / 'nope.json')]) == 2
    assert 'not found' in capsys.readouterr().err


def test_missing_config_is_a_usage_error(tmp_path):
    graph, _ = _fixture_files(tmp_path, 'iv_bow')
    assert main(['--config', str(tmp_path / 'nope.yaml'), 'classify', str(graph)]) == 2


@pytest.mark.parametrize('doc', [
    {'n': 2, 'directed': [[0, 1], [1, 0]]},
    {'n': 'two'},
    {'n': 2, 'directed': [[0, 5]]},
])
def test_bad_graphs_are_domain_errors(tmp_path, doc, capsys):
    assert main(['classify', str(_write(tmp_path, doc))]) == 1
    assert capsys.readouterr().err.startswith('❌')


def test_seed_file_with_an_invalid_triple(tmp_path, capsys):
    graph, _ = _fixture_files(tmp_path, 'iv_bow')
    seeds = _write(tmp_path, {'iv': [['Z', 'T']]}, 'seeds.json')
    assert main(['classify', str(graph), '--seeds', str(seeds)]) == 1
    assert 'Schema violation' in capsys.readouterr().err


def test_discover_iv(tmp_path, capsys):
    graph, _ = _fixture_files(tmp_path, 'iv_bow')
    assert main(['-q', 'discover-iv', str(graph)]) == 0
    out = capsys.readouterr().out
    assert 'Z,T,Y,True' in out


@pytest.mark.oracle
def test_verify_agrees_on_iv_bow(tmp_path):
    graph, _ = _fixture_files(tmp_path, 'iv_bow')
    out = tmp_path / 'verify.csv'
    assert main(['-q', 'verify', str(graph), '--trials', '3', '--rng-seed', '5', '--out', str(out)]) == 0
    text = out.read_text(encoding='utf-8')
    assert '# rng_seed: 5' in text
    table = pd.read_csv(out, comment='#')
    assert table['agree'].all()
    assert len(table) == 3


def test_bench_lists_and_runs(tmp_path, capsys):
    assert main(['bench']) == 0
    assert 'seed_sources' in capsys.readouterr().out

    out = tmp_path / 'convergence.csv'
    assert main(['-q', 'bench', 'convergence', '--n', '3', '--out', str(out)]) == 0
    text = out.read_text(encoding='utf-8')
    assert '# experiment: convergence' in text
    assert pd.read_csv(out, comment='#')['share'].sum() == pytest.approx(1.0)


def test_bench_errors(capsys):
    assert main(['bench', 'table9']) == 1
    assert main(['bench', 'convergence', '--jobs', '0']) == 2
    assert main(['bench', 'seed_sources', '--n', '7']) == 1


def test_rng_seed_from_the_environment(tmp_path, monkeypatch):
    monkeypatch.setenv('IIC_RNG_SEED', '77')
    out = tmp_path / 'convergence.csv'
    assert main(['-q', 'bench', 'convergence', '--n', '3', '--out', str(out)]) == 0
    assert '# rng_seed: 77' in out.read_text(encoding='utf-8')


def test_simulate_then_estimate(tmp_path):
    graph, seeds = _fixture_files(tmp_path, 'six_node_estimation')
    data, truth = tmp_path / 'data.csv', tmp_path / 'truth.csv'
    assert main(['-q', 'simulate', '--fixture', 'six_node_estimation', '--samples', '3000', '--rng-seed', '3',
                 '--out', str(data), '--params-out', str(truth)]) == 0
    frame = pd.read_csv(data, comment='#')
    assert len(frame) == 6000
    assert '__regime' in frame.columns

    out = tmp_path / 'estimates.csv'
    assert main(['-q', 'estimate', str(graph), '--data', str(data), '--seeds', str(seeds), '--boot', '0',
                 '--out', str(out)]) == 0
    estimates = pd.read_csv(out, comment='#').set_index('edge')
    values = pd.read_csv(truth, comment='#').set_index('edge')['value']
    assert len(estimates['estimate'].dropna()) == 5
    for edge, value in estimates['estimate'].dropna().items():
        assert abs(value - values[edge]) < 0.15


def test_estimate_needs_data(tmp_path):
    graph, _ = _fixture_files(tmp_path, 'five_node_estimation')
    assert main(['estimate', str(graph)]) == 2


def test_simulate_from_a_graph(tmp_path):
    graph = _write(tmp_path, {'n': 3, 'directed': [[0, 1], [1, 2]], 'bidirected': [[1, 2]]})
    out = tmp_path / 'data.csv'
    assert main(['-q', 'simulate', str(graph), '--samples', '50', '--intervene', '1', '--out', str(out)]) == 0
    frame = pd.read_csv(out, comment='#')
    assert list(frame.columns) == ['0', '1', '2', '__regime']
    assert sorted(frame['__regime'].unique()) == [-1, 1]
