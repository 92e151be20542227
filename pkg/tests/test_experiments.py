import logging

import numpy as np
import pandas as pd
import pytest

from iic.exceptions import GraphTooLarge, UnknownExperiment
from iic.experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from iic.generators import GraphFamily

logger = logging.getLogger(__name__)


def test_registry_is_complete():
    assert set(EXPERIMENTS) == {
        'seed_sources', 'interventions', 'ad_compare', 'convergence', 'precision', 'completeness',
        'gap_structure', 'scalability', 'seed_tradeoff', 'robustness', 'amplification',
        'estimation', 'baselines',
    }
    assert all(entry.description for entry in EXPERIMENTS.values())


def test_unknown_experiment():
    with pytest.raises(UnknownExperiment):
        run_experiment('table9')


def test_exhaustive_families_are_bounded():
    with pytest.raises(GraphTooLarge):
        run_experiment('seed_sources', ExperimentConfig(n=6))


def test_seed_sources_on_three_nodes():
    frame = run_experiment('seed_sources', ExperimentConfig(n=3))
    assert list(frame['source']) == ['none', 'iv', 'exogenous', 'iv+exogenous']
    counts = dict(zip(frame['source'], frame['identified']))
    assert counts['none'] <= counts['iv'] <= counts['iv+exogenous']
    assert counts['exogenous'] <= counts['iv+exogenous']
    assert frame['rate_pct'].between(0, 100).all()
    assert frame.attrs['experiment'] == 'seed_sources'


def test_interventions_never_lose_edges():
    frame = run_experiment('interventions', ExperimentConfig(n=5, graphs=10, rng_seed=1))
    rows = frame.set_index('method')
    assert rows.loc['iic (k=1)', 'identified'] >= rows.loc['unseeded', 'identified']
    assert rows.loc['iic (k=1)', 'identified'] >= rows.loc['seeds only', 'identified']
    assert (frame['graphs'] == 10).all()
    assert frame.attrs['rng_seed'] == 1


def test_results_do_not_depend_on_the_worker_count():
    cfg = dict(n=5, graphs=6, rng_seed=2)
    serial = run_experiment('interventions', ExperimentConfig(**cfg))
    parallel = run_experiment('interventions', ExperimentConfig(jobs=2, **cfg))
    pd.testing.assert_frame_equal(serial, parallel)


def test_ancestral_baseline_is_subsumed():
    row = run_experiment('ad_compare', ExperimentConfig(n=3)).iloc[0]
    assert row['ad_only'] == 0
    assert row['ad_beyond_htc'] == 0
    assert row['ad'] <= row['htc'] <= row['iic'] <= row['edges']


def test_convergence_shares():
    frame = run_experiment('convergence', ExperimentConfig(n=3))
    assert frame['share'].sum() == pytest.approx(1.0)
    assert frame.attrs['max_iterations'] == frame['iterations'].max()


@pytest.mark.oracle
def test_newly_identified_edges_are_confirmed():
    row = run_experiment('precision', ExperimentConfig(n=3, trials=2)).iloc[0]
    assert row['new_confirmed'] == row['new']


def test_completeness_by_condition():
    frame = run_experiment('completeness', ExperimentConfig(graphs=20, rng_seed=3)).set_index('condition')
    assert frame.loc['all', 'graphs'] == 20
    for condition in ('parent-sibling separated', 'unconfounded'):
        assert frame.loc[condition, 'gap'] == 0
        assert frame.loc[condition, 'identified'] == frame.loc[condition, 'edges']
    assert frame.loc['all', 'edges'] == frame.loc['all', ['identified', 'non_identifiable', 'gap']].sum()


def test_gap_structure_columns():
    frame = run_experiment('gap_structure', ExperimentConfig(graphs=20, rng_seed=4))
    assert list(frame.columns) == ['r_size', 'r_sib_overlap', 'edges', 'law_holds']
    if len(frame):
        assert frame['edges'].sum() == frame.attrs['inconclusive_edges']
        assert (frame['r_size'] >= frame['r_sib_overlap']).all()


def test_seed_tradeoff_is_monotone():
    frame = run_experiment('seed_tradeoff', ExperimentConfig(graphs=10, k=2, rng_seed=5))
    assert list(frame['k']) == [0, 1, 2]
    assert frame['identified'].is_monotonic_increasing


def test_robustness_rows():
    frame = run_experiment('robustness', ExperimentConfig(graphs=4, rates=(0.3,), rng_seed=6))
    assert len(frame) == 4
    assert set(frame['kind']) == {'MissingDirected', 'ExtraDirected', 'MissingConfounder', 'ExtraConfounder'}
    assert ((frame['graphs'] + frame['skipped']) == 4).all()
    used = frame['precision'].dropna()
    assert used.between(0, 1).all()


def test_robustness_scores_shared_edges_only():
    # unconfounded graphs stay fully identified when directed edges move
    cfg = ExperimentConfig(n=5, graphs=10, p_bi=0.0, rates=(0.3,), rng_seed=11)
    frame = run_experiment('robustness', cfg).set_index('kind')
    for kind in ('MissingDirected', 'ExtraDirected'):
        assert frame.loc[kind, 'precision'] == 1.0
        assert frame.loc[kind, 'recall'] == 1.0
    assert frame.loc['MissingConfounder', 'skipped'] == 10


def test_amplification_rows():
    frame = run_experiment('amplification', ExperimentConfig(graphs=5, k=2, rng_seed=7))
    assert list(frame['k']) == [1, 2]
    gains = frame['gain_mean'].dropna()
    assert (gains >= 0).all()


def test_scalability_defaults_to_a_fifth_of_the_nodes():
    frame = run_experiment('scalability', ExperimentConfig(n=12, graphs=2, rng_seed=8))
    assert list(frame['graph']) == [0, 1]
    assert (frame['k'] == 2).all()
    assert (frame['iic_rate_pct'] >= frame['unseeded_rate_pct']).all()

    rule = EXPERIMENTS['scalability'].defaults['k']
    assert rule(ExperimentConfig(n=100)) == 20
    assert rule(ExperimentConfig(n=3)) == 1
    explicit = run_experiment('scalability', ExperimentConfig(n=12, k=4, graphs=1, rng_seed=8))
    assert (explicit['k'] == 4).all()


@pytest.mark.slow
def test_estimation_table():
    cfg = ExperimentConfig(sample_sizes=(400,), replications=3, n_boot=5, rng_seed=9)
    frame = run_experiment('estimation', cfg)
    assert set(frame['edge']) == {'0->1', '1->2', '3->1'}
    assert np.allclose(frame['rmse_sqrt_n'], frame['rmse'] * np.sqrt(400))
    assert frame['coverage'].between(0, 1).all()


@pytest.mark.slow
def test_baselines_table():
    cfg = ExperimentConfig(sample_sizes=(2000,), replications=2, rng_seed=10)
    frame = run_experiment('baselines', cfg)
    assert set(frame['method']) == {'iic', '2sls', 'ols'}
    assert list(frame.loc[frame['method'] == '2sls', 'edge']) == ['T->Y']
    assert len(frame[frame['method'] == 'iic']) == 5


def test_family_override():
    frame = run_experiment('convergence', ExperimentConfig(n=3, family=GraphFamily.ALL_MAXIMAL_CONFOUNDED))
    assert frame['graphs'].sum() == 25


# --- full-size runs ----------------------------------------------------------

def _report(frame):
    logger.info('%s\n%s', frame.attrs.get('experiment', ''), frame.to_string())


def test_seed_sources_on_every_four_node_graph():
    frame = run_experiment('seed_sources', ExperimentConfig(n=4)).set_index('source')
    counts = frame['identified']
    assert counts['none'] <= counts['iv'] <= counts['iv+exogenous']
    assert counts['exogenous'] <= counts['iv+exogenous']
    # maximal confounding only joins ancestrally unrelated pairs, so no bow survives
    assert frame.loc['none', 'rate_pct'] == 100.0


def _assert_precise(row):
    assert row['new_confirmed'] == row['new']
    assert row['non_id_confirmed'] == row['non_id']
    assert row['inconclusive_identifiable'] == 0


@pytest.mark.slow
@pytest.mark.oracle
def test_precision_on_every_four_node_graph():
    _assert_precise(run_experiment('precision', ExperimentConfig(n=4, trials=3)).iloc[0])


@pytest.mark.slow
@pytest.mark.oracle
def test_precision_on_every_five_node_graph():
    _assert_precise(run_experiment('precision', ExperimentConfig(n=5, trials=2, jobs=4)).iloc[0])


@pytest.mark.slow
def test_estimation_is_root_n_consistent():
    cfg = ExperimentConfig(sample_sizes=(100, 1000, 10000), replications=200, n_boot=100, jobs=4)
    frame = run_experiment('estimation', cfg)
    _report(frame)
    large = frame[frame['n'] >= 1000]
    for _, block in large.groupby('edge'):
        scaled = block['rmse_sqrt_n']
        assert scaled.max() / scaled.min() <= 1.6
    for _, block in large.groupby('n'):
        assert 0.90 <= block['coverage'].mean() <= 0.99
    assert (frame.groupby('edge')['rmse'].apply(lambda s: s.is_monotonic_decreasing)).all()


@pytest.mark.slow
def test_baselines_separate_consistent_and_confounded_estimators():
    frame = run_experiment('baselines', ExperimentConfig(sample_sizes=(5000,), replications=200, jobs=4))
    _report(frame)
    iic = frame[frame['method'] == 'iic']
    assert (iic['bias'].abs() <= 0.02).all()
    ols = frame[frame['method'] == 'ols'].set_index('edge')
    for edge in ('T->Y', 'W1->Y', 'W2->Y'):
        assert abs(ols.loc[edge, 'bias']) >= 0.1


@pytest.mark.slow
def test_robustness_at_thirty_percent():
    frame = run_experiment('robustness', ExperimentConfig(graphs=500, rates=(0.3,), jobs=4))
    _report(frame)
    assert ((frame['graphs'] + frame['skipped']) == 500).all()
    scored = frame.dropna(subset=['precision', 'recall'])
    assert scored['precision'].between(0, 1).all()
    assert scored['recall'].between(0, 1).all()


@pytest.mark.slow
def test_scalability_at_one_hundred_nodes():
    frame = run_experiment('scalability', ExperimentConfig(graphs=1))
    row = frame.iloc[0]
    assert row['n'] == 100 and row['k'] == 20
    assert row['seconds'] < 60
    assert row['iic_rate_pct'] >= row['unseeded_rate_pct']


@pytest.mark.slow
def test_intervention_rates_at_six_nodes():
    rates = {}
    for k in (1, 2):
        frame = run_experiment('interventions', ExperimentConfig(n=6, k=k, graphs=1881, rng_seed=99, jobs=4))
        _report(frame)
        rows = frame.set_index('method')
        assert rows.loc['unseeded', 'edges'] == pytest.approx(8498, rel=0.03)
        rates['unseeded'] = rows.loc['unseeded', 'rate_pct']
        rates[k] = rows.loc[f'iic (k={k})', 'rate_pct']
    assert rates['unseeded'] == pytest.approx(79.5, abs=0.5)
    assert rates[1] == pytest.approx(85.5, abs=0.5)
    assert rates[2] == pytest.approx(89.8, abs=0.5)
    assert rates['unseeded'] <= rates[1] <= rates[2]
