import itertools

import pytest

from iic.exceptions import ConfigError, InfeasiblePerturbation
from iic.fixtures import get_fixture
from iic.generators import (
    EnumerationConfig,
    GraphFamily,
    Perturbation,
    PerturbationKind,
    canonical_iv_triple,
    enumerate_all_maximal_confounded,
    enumerate_iv_structured,
    generate,
    labeled_dags,
    maximally_confounded,
    perturb,
    random_graphs,
    random_mixed_graph,
)
from iic.graph import build_graph
from iic.seeds import validate_iv_triple


@pytest.mark.parametrize('n, count', [(1, 1), (2, 3), (3, 25), (4, 543)])
def test_labeled_dag_counts(n, count):
    assert sum(1 for _ in labeled_dags(n)) == count


def test_maximal_confounding_joins_unordered_pairs():
    chain = maximally_confounded(3, [(0, 1), (1, 2)])
    assert not chain.bidirected
    empty = maximally_confounded(3, [])
    assert empty.bidirected_edges() == [(0, 1), (0, 2), (1, 2)]
    fork = maximally_confounded(3, [(0, 1), (0, 2)])
    assert fork.bidirected_edges() == [(1, 2)]


def test_all_maximal_confounded_graphs_are_distinct():
    graphs = list(enumerate_all_maximal_confounded(3))
    assert len(graphs) == 25
    assert len(set(graphs)) == 25


def test_iv_structured_graphs_carry_a_valid_first_stage():
    found = list(enumerate_iv_structured(3))
    assert found
    for g, triple in found:
        assert validate_iv_triple(g, *triple).z_to_t_ok
        assert triple == canonical_iv_triple(g)


def test_canonical_triple_prefers_full_instruments():
    assert canonical_iv_triple(get_fixture('iv_bow').graph) == (0, 1, 2)
    assert canonical_iv_triple(build_graph(3, [], [(0, 1), (0, 2), (1, 2)])) is None


def test_random_graphs_are_reproducible():
    cfg = EnumerationConfig(n=6, p_dir=0.4, p_bi=0.3, count=5, rng_seed=123)
    first = list(random_graphs(cfg))
    second = list(random_graphs(cfg))
    assert len(first) == 5
    assert first == second
    assert list(generate(cfg)) == first


@pytest.mark.parametrize('p, directed, bidirected', [(0.0, 0, 0), (1.0, 10, 10)])
def test_edge_probabilities_at_the_extremes(p, directed, bidirected):
    g = random_mixed_graph(EnumerationConfig(n=5, p_dir=p, p_bi=p, rng_seed=1))
    assert len(g.directed) == directed
    assert len(g.bidirected) == bidirected


def test_generate_dispatches_on_the_family():
    cfg = EnumerationConfig(n=3, family=GraphFamily.ALL_MAXIMAL_CONFOUNDED)
    assert len(list(generate(cfg))) == 25
    iv = EnumerationConfig(n=3, family=GraphFamily.IV_STRUCTURED)
    assert len(list(generate(iv))) == len(list(enumerate_iv_structured(3)))


@pytest.mark.parametrize('kwargs', [{'n': 1}, {'n': 4, 'p_dir': 1.5}, {'n': 4, 'p_bi': -0.1}, {'n': 4, 'count': -1}])
def test_invalid_enumeration_configs(kwargs):
    with pytest.raises(ConfigError):
        EnumerationConfig(**kwargs)


# --- perturbation ------------------------------------------------------------

def _graph(n_directed=4, n_bidirected=4):
    pairs = list(itertools.combinations(range(6), 2))
    return build_graph(6, pairs[:n_directed], pairs[-n_bidirected:] if n_bidirected else [])


@pytest.mark.parametrize('kind, rate, expected', [
    (PerturbationKind.MISSING_CONFOUNDER, 0.3, 1),
    (PerturbationKind.MISSING_DIRECTED, 0.5, 2),
    (PerturbationKind.EXTRA_DIRECTED, 0.1, 1),
    (PerturbationKind.EXTRA_CONFOUNDER, 0.6, 2),
])
def test_perturbation_size_rounds_half_up(kind, rate, expected):
    assert Perturbation(kind, rate).size(_graph()) == expected


def test_perturbation_size_on_an_empty_edge_set():
    g = _graph(n_bidirected=0)
    assert Perturbation(PerturbationKind.EXTRA_CONFOUNDER, 0.3).size(g) == 0


@pytest.mark.parametrize('rate', [0.0, 1.0, -0.2])
def test_perturbation_rate_must_be_a_fraction(rate):
    with pytest.raises(ConfigError):
        Perturbation(PerturbationKind.MISSING_DIRECTED, rate)


def test_missing_confounder_removes_one_of_four():
    g = _graph()
    h = perturb(g, Perturbation(PerturbationKind.MISSING_CONFOUNDER, 0.3), rng_seed=0)
    assert len(h.bidirected) == 3
    assert h.bidirected < g.bidirected
    assert h.directed == g.directed


def test_missing_directed_removes_edges():
    g = _graph()
    h = perturb(g, Perturbation(PerturbationKind.MISSING_DIRECTED, 0.5), rng_seed=0)
    assert len(h.directed) == 2 and h.directed < g.directed


def test_extra_directed_stays_acyclic():
    g = _graph()
    for seed in range(30):
        h = perturb(g, Perturbation(PerturbationKind.EXTRA_DIRECTED, 0.5), rng_seed=seed)
        assert len(h.directed) == 6
        assert g.directed < h.directed


def test_extra_confounder_adds_new_pairs():
    g = _graph()
    h = perturb(g, Perturbation(PerturbationKind.EXTRA_CONFOUNDER, 0.3), rng_seed=0)
    assert len(h.bidirected) == 5 and g.bidirected < h.bidirected


def test_empty_edge_sets():
    g = _graph(n_bidirected=0)
    assert perturb(g, Perturbation(PerturbationKind.EXTRA_CONFOUNDER, 0.3), rng_seed=0) == g
    with pytest.raises(InfeasiblePerturbation):
        perturb(g, Perturbation(PerturbationKind.MISSING_CONFOUNDER, 0.3), rng_seed=0)


def test_no_room_for_extra_confounders():
    g = build_graph(3, [], [(0, 1), (0, 2), (1, 2)])
    with pytest.raises(InfeasiblePerturbation):
        perturb(g, Perturbation(PerturbationKind.EXTRA_CONFOUNDER, 0.5), rng_seed=0)


def test_perturbation_is_deterministic_per_seed():
    g = _graph()
    p = Perturbation(PerturbationKind.MISSING_DIRECTED, 0.5)
    assert perturb(g, p, rng_seed=4) == perturb(g, p, rng_seed=4)
