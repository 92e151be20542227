import dataclasses

import numpy as np
import pytest

from iic.closure import ClosureRequest, iic_close
from iic.config import get_settings
from iic.estimate import (
    OBSERVATIONAL,
    Dataset,
    error_propagation_report,
    estimate_from_cov,
    iic_estimate,
    ols_baseline,
    population_covs,
    regime_params,
    sample_cov,
    simulate_data,
    tsls_baseline,
)
from iic.exceptions import (
    IllConditionedSystem,
    MissingRegimeData,
    TooFewSamples,
    WeakInstrument,
)
from iic.fixtures import get_fixture
from iic.oracle import sample_params
from iic.seeds import SeedSpec, resolve_seeds


def _population_estimate(name, settings=None, strict=False):
    fx = get_fixture(name)
    covs = population_covs(fx.params, fx.seeds.intervened)
    seeds = resolve_seeds(fx.graph, fx.seeds)
    sigma = covs.pop(OBSERVATIONAL)
    result = estimate_from_cov(fx.graph, sigma, seeds=seeds, regime_covs=covs, settings=settings, strict=strict)
    return fx, result


@pytest.mark.parametrize('name', ['five_node_estimation', 'six_node_estimation'])
def test_population_covariance_recovers_every_identified_edge(name):
    fx, result = _population_estimate(name)
    closure = iic_close(ClosureRequest(graph=fx.graph, seed=resolve_seeds(fx.graph, fx.seeds)))
    assert set(result.estimates) == set(closure.identified_set)
    for edge, value in result.estimates.items():
        assert value == pytest.approx(fx.params.B[edge], abs=1e-10)
    assert not result.unestimated


def test_five_node_sources_and_depths():
    fx, result = _population_estimate('five_node_estimation')
    assert result.origin[(0, 1)] == 'IvRatio'
    assert result.origin[(1, 2)] == 'IvRatio'
    assert result.origin[(3, 1)] == 'HTC'
    assert result.depth[(0, 1)] == 0


def test_six_node_chain_through_the_reduced_witness():
    fx, result = _population_estimate('six_node_estimation')
    g = fx.graph
    w2_y = (g.index_of('W2'), g.index_of('Y'))
    assert result.origin[w2_y] == 'ReducedHTC'
    assert result.origin[(g.index_of('W1'), g.index_of('Y'))] == 'InterventionRegression'
    assert result.depth[w2_y] >= 1
    report = error_propagation_report(result)
    assert report.depth >= 1
    assert report.c_d >= get_settings().estimate.c0


def test_ill_conditioned_systems_are_skipped_or_raised():
    base = get_settings()
    strict_cfg = dataclasses.replace(base, estimate=dataclasses.replace(base.estimate, kappa_max=0.5))
    fx, result = _population_estimate('five_node_estimation', settings=strict_cfg)
    assert (3, 1) in result.unestimated
    assert (3, 1) not in result.estimates
    assert (0, 1) in result.estimates
    with pytest.raises(IllConditionedSystem):
        _population_estimate('five_node_estimation', settings=strict_cfg, strict=True)


def test_prior_values_are_used_verbatim():
    fx = get_fixture('five_node_estimation')
    spec = SeedSpec.build(prior=[(3, 4, 0.25)])
    result = iic_estimate(fx.graph, simulate_data(fx.params, 500, 1), spec, n_boot=0)
    assert result.estimates[(3, 4)] == 0.25
    assert result.origin[(3, 4)] == 'PriorValue'


def test_finite_sample_estimates_are_close():
    fx = get_fixture('six_node_estimation')
    data = simulate_data(fx.params, 20000, 11, fx.seeds.intervened)
    result = iic_estimate(fx.graph, data, fx.seeds, n_boot=0)
    for edge, value in result.estimates.items():
        assert abs(value - fx.params.B[edge]) < 0.08, fx.graph.edge_label(edge)


def test_ols_is_biased_under_confounding():
    fx = get_fixture('six_node_estimation')
    g = fx.graph
    data = simulate_data(fx.params, 20000, 12)
    ols = ols_baseline(g, data)
    for a, b in [('T', 'Y'), ('W1', 'Y'), ('W2', 'Y')]:
        edge = (g.index_of(a), g.index_of(b))
        assert ols[edge] - fx.params.B[edge] > 0.1
    z_t = (g.index_of('Z'), g.index_of('T'))
    assert abs(ols[z_t] - fx.params.B[z_t]) < 0.05


def test_tsls_matches_the_instrument_ratio():
    fx = get_fixture('six_node_estimation')
    g = fx.graph
    data = simulate_data(fx.params, 5000, 13)
    triple = fx.seeds.iv_triples[0]
    value = tsls_baseline(g, data, triple)
    S = sample_cov(data)
    z, tt, y = triple
    assert value == pytest.approx(S[z, y] / S[z, tt])


def test_tsls_refuses_invalid_instruments():
    fx = get_fixture('endogenous_instrument')
    data = simulate_data(sample_params(fx.graph, 0), 500, 14)
    assert tsls_baseline(fx.graph, data, fx.seeds.iv_triples[0]) is None
    assert tsls_baseline(fx.graph, data, fx.seeds.iv_triples[0], validate=False) is not None


def test_weak_instrument_is_reported():
    fx = get_fixture('six_node_estimation')
    data = simulate_data(fx.params, 500, 15)
    with pytest.raises(WeakInstrument):
        tsls_baseline(fx.graph, data, fx.seeds.iv_triples[0], weak_instrument=1e6)


def test_bootstrap_is_reproducible():
    fx = get_fixture('five_node_estimation')
    data = simulate_data(fx.params, 800, 16)
    first = iic_estimate(fx.graph, data, fx.seeds, n_boot=20, rng_seed=3)
    second = iic_estimate(fx.graph, data, fx.seeds, n_boot=20, rng_seed=3)
    assert first.se == second.se
    for edge, (lo, hi) in first.ci.items():
        assert lo < first.estimates[edge] < hi
        assert first.se[edge] > 0
    frame = first.to_frame()
    assert list(frame.columns) == ['edge', 'estimate', 'se', 'ci_lo', 'ci_hi', 'source', 'depth', 'note']
    assert set(frame['edge']) == {'0->1', '1->2', '3->1'}


@pytest.mark.slow
def test_parallel_bootstrap_matches_serial():
    fx = get_fixture('five_node_estimation')
    data = simulate_data(fx.params, 500, 17)
    serial = iic_estimate(fx.graph, data, fx.seeds, n_boot=8, rng_seed=5)
    parallel = iic_estimate(fx.graph, data, fx.seeds, n_boot=8, rng_seed=5, jobs=2)
    assert serial.se == parallel.se


def test_too_few_samples():
    fx = get_fixture('five_node_estimation')
    with pytest.raises(TooFewSamples):
        iic_estimate(fx.graph, simulate_data(fx.params, 5, 1), fx.seeds, n_boot=0)
    with pytest.raises(TooFewSamples):
        sample_cov(np.zeros((1, 3)))


def test_single_row_regime_is_named():
    fx = get_fixture('five_node_estimation')
    data = simulate_data(fx.params, 200, 2)
    lone = Dataset(data.X[:1], np.array([3]))
    with pytest.raises(TooFewSamples, match='1 sample\\(s\\) given in regime 3') as info:
        iic_estimate(fx.graph, Dataset.stack([data, lone]), fx.seeds, n_boot=0)
    assert info.value.regime == 3


def test_intervention_seed_needs_its_regime():
    fx = get_fixture('six_node_estimation')
    observational_only = simulate_data(fx.params, 500, 18)
    with pytest.raises(MissingRegimeData):
        iic_estimate(fx.graph, observational_only, fx.seeds, n_boot=0)


def test_nothing_identified_gives_no_estimates():
    g = get_fixture('iv_bow').graph.with_edges(add_bidirected=[(0, 1)])
    # Z <-> T also blocks the first stage
    result = iic_estimate(g, np.random.default_rng(0).standard_normal((50, 4)), n_boot=0)
    assert result.estimates == {}


def test_regime_params_cut_incoming_edges():
    fx = get_fixture('six_node_estimation')
    w1 = fx.graph.index_of('W1')
    q = regime_params(fx.params, w1)
    assert not q.B[:, w1].any()
    assert q.omega[w1, w1] == 1.0
    assert np.count_nonzero(q.omega[w1]) == 1


def test_dataset_resample_keeps_regime_sizes():
    fx = get_fixture('six_node_estimation')
    data = simulate_data(fx.params, 40, 19, fx.seeds.intervened)
    assert data.regimes() == [OBSERVATIONAL, fx.graph.index_of('W1')]
    replicate = data.resample(np.random.default_rng(0))
    for r in data.regimes():
        assert replicate.rows(r).shape == data.rows(r).shape


def test_dataset_rejects_bad_input():
    with pytest.raises(ValueError):
        Dataset(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 2)), np.zeros(2))