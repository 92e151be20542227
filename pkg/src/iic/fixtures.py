"""Named example graphs with their side information.

``iic fixture NAME`` prints the graph JSON. The estimation fixtures also
carry a fixed parameter realization.

Encodings:
  iv_bow                 Z -> T -> Y <- W with T <-> Y and W <-> Y.
  shared_instrument      Z instruments both T and U; W is a confounded parent of Y.
  double_bow             four integer-labelled nodes, 0 -> 1 -> 2 <- 3 with 1 <-> 2, 3 <-> 2.
  endogenous_instrument  U -> Z makes the would-be instrument Z endogenous.
  mr                     three genetic instruments, three exposures, CRP, smoking, CHD.
  sachs                  consensus protein-signalling network with six latent confounders.
  education              Q -> E -> Y; ability A observed with its unmeasured part as E <-> Y.
"""
from __future__ import annotations

import logging
import typing as t

import numpy as np

from .exceptions import UnknownFixture
from .graph import MixedGraph, build_graph
from .oracle import ParamRealization
from .seeds import SeedSpec

logger = logging.getLogger(__name__)


class Fixture(t.NamedTuple):
    name: str
    graph: MixedGraph
    seeds: SeedSpec
    description: str
    params: t.Optional[ParamRealization] = None


def _labelled(
    labels: t.Sequence[str],
    directed: t.Iterable[t.Tuple[str, str]],
    bidirected: t.Iterable[t.Tuple[str, str]] = (),
) -> MixedGraph:
    idx = {name: k for k, name in enumerate(labels)}
    return build_graph(
        len(labels),
        [(idx[a], idx[b]) for a, b in directed],
        [(idx[a], idx[b]) for a, b in bidirected],
        dict(enumerate(labels)),
    )


def _iv(g: MixedGraph, *triples: t.Tuple[str, str, str]) -> t.Tuple[t.Tuple[int, int, int], ...]:
    return tuple(tuple(g.index_of(v) for v in tr) for tr in triples)


def _realization(g: MixedGraph, coefficients: t.Mapping[t.Tuple[str, str], float], conf: float) -> ParamRealization:
    n = g.n_nodes
    B = np.zeros((n, n))
    for (a, b), value in coefficients.items():
        B[g.index_of(a), g.index_of(b)] = value
    omega = np.eye(n)
    for a, b in g.bidirected_edges():
        omega[a, b] = omega[b, a] = conf
    return ParamRealization(B=B, omega=omega)


def iv_bow() -> Fixture:
    g = _labelled(
        ['Z', 'T', 'Y', 'W'],
        [('Z', 'T'), ('T', 'Y'), ('W', 'Y')],
        [('T', 'Y'), ('W', 'Y')],
    )
    return Fixture('iv_bow', g, SeedSpec(iv_triples=_iv(g, ('Z', 'T', 'Y'))), 'HTC fails at Y; one IV seed')


def shared_instrument() -> Fixture:
    g = _labelled(
        ['Z', 'T', 'U', 'W', 'Y'],
        [('Z', 'T'), ('Z', 'U'), ('T', 'Y'), ('W', 'Y'), ('U', 'Y')],
        [('T', 'Y'), ('W', 'Y')],
    )
    return Fixture(
        'shared_instrument', g, SeedSpec(iv_triples=_iv(g, ('Z', 'T', 'Y'), ('Z', 'U', 'Y'))),
        'one instrument with two children',
    )


def double_bow() -> Fixture:
    g = build_graph(4, [(0, 1), (1, 2), (3, 2)], [(1, 2), (3, 2)])
    return Fixture('double_bow', g, SeedSpec(iv_triples=((0, 1, 2),)), 'standard HTC fails at node 2')


def endogenous_instrument() -> Fixture:
    g = _labelled(['U', 'Z', 'T', 'Y'], [('U', 'Z'), ('U', 'Y'), ('Z', 'T'), ('T', 'Y')])
    return Fixture('endogenous_instrument', g, SeedSpec(iv_triples=_iv(g, ('Z', 'T', 'Y'))), 'endogenous instrument')


def mr() -> Fixture:
    g = _labelled(
        ['G_bmi', 'G_ldl', 'G_bp', 'BMI', 'LDL', 'SBP', 'CRP', 'SMK', 'CHD'],
        [
            ('G_bmi', 'BMI'), ('G_ldl', 'LDL'), ('G_bp', 'SBP'), ('G_bp', 'CRP'),
            ('BMI', 'CHD'), ('LDL', 'CHD'), ('LDL', 'SBP'), ('SBP', 'CHD'), ('CRP', 'CHD'),
            ('SMK', 'BMI'), ('SMK', 'LDL'), ('SMK', 'CRP'), ('SMK', 'CHD'),
        ],
        [('BMI', 'CHD'), ('LDL', 'CHD'), ('SBP', 'CHD'), ('CRP', 'CHD')],
    )
    seeds = SeedSpec(iv_triples=_iv(g, ('G_bmi', 'BMI', 'CHD'), ('G_ldl', 'LDL', 'CHD'), ('G_bp', 'SBP', 'CHD')))
    return Fixture('mr', g, seeds, 'Mendelian randomization network for coronary heart disease')


def sachs() -> Fixture:
    g = _labelled(
        ['Raf', 'Mek', 'Plcg', 'PIP2', 'PIP3', 'Erk', 'Akt', 'PKA', 'PKC', 'P38', 'Jnk'],
        [
            ('Erk', 'Akt'), ('Mek', 'Erk'), ('PIP3', 'PIP2'), ('PKA', 'Akt'), ('PKA', 'Erk'),
            ('PKA', 'Jnk'), ('PKA', 'Mek'), ('PKA', 'P38'), ('PKA', 'Raf'), ('PKC', 'Jnk'),
            ('PKC', 'Mek'), ('PKC', 'P38'), ('PKC', 'PKA'), ('PKC', 'Raf'), ('Plcg', 'PIP2'),
            ('Plcg', 'PIP3'), ('Raf', 'Mek'),
        ],
        [('Raf', 'Erk'), ('Mek', 'Akt'), ('Plcg', 'P38'), ('PIP2', 'Jnk'), ('PIP3', 'Erk'), ('Jnk', 'P38')],
    )
    seeds = SeedSpec(intervened=frozenset({g.index_of('PKA'), g.index_of('PKC')}))
    return Fixture('sachs', g, seeds, 'protein signalling; interventions on PKA and PKC for estimation')


def education() -> Fixture:
    g = _labelled(
        ['Q', 'E', 'Y', 'A', 'R', 'X'],
        [('Q', 'E'), ('E', 'Y'), ('A', 'E'), ('A', 'Y'), ('R', 'Y'), ('X', 'Y'), ('X', 'E')],
        [('E', 'Y')],
    )
    return Fixture('education', g, SeedSpec(iv_triples=_iv(g, ('Q', 'E', 'Y'))), 'returns to education')


def five_node_estimation() -> Fixture:
    g = build_graph(5, [(0, 1), (3, 1), (1, 2), (2, 4), (3, 4)], [(1, 2), (2, 4), (3, 4)])
    params = _realization(
        g, {('0', '1'): 0.8, ('3', '1'): 0.6, ('1', '2'): -0.5, ('2', '4'): 0.7, ('3', '4'): 0.5}, 0.3,
    )
    return Fixture(
        'five_node_estimation', g, SeedSpec(iv_triples=((0, 1, 2),)),
        'IV seeds two edges, the half-trek criterion adds 3 -> 1', params,
    )


def six_node_estimation() -> Fixture:
    g = _labelled(
        ['Z', 'T', 'Y', 'W1', 'W2', 'W3'],
        [('Z', 'T'), ('T', 'Y'), ('W1', 'Y'), ('W2', 'Y'), ('W3', 'W2')],
        [('T', 'Y'), ('W1', 'Y'), ('W2', 'Y')],
    )
    params = _realization(
        g, {('Z', 'T'): 1.0, ('T', 'Y'): 0.7, ('W1', 'Y'): 0.5, ('W2', 'Y'): 0.6, ('W3', 'W2'): 0.8}, 0.3,
    )
    seeds = SeedSpec(iv_triples=_iv(g, ('Z', 'T', 'Y')), intervened=frozenset({g.index_of('W1')}))
    return Fixture('six_node_estimation', g, seeds, 'three confounded parents of Y; only T has an instrument', params)


FIXTURES: t.Dict[str, t.Callable[[], Fixture]] = {
    'iv_bow': iv_bow,
    'shared_instrument': shared_instrument,
    'double_bow': double_bow,
    'endogenous_instrument': endogenous_instrument,
    'mr': mr,
    'sachs': sachs,
    'education': education,
    'five_node_estimation': five_node_estimation,
    'six_node_estimation': six_node_estimation,
}


def get_fixture(name: str) -> Fixture:
    if name not in FIXTURES:
        raise UnknownFixture(name, FIXTURES)
    return FIXTURES[name]()
