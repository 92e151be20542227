"""Graph families for the experiments: exhaustive enumeration, random graphs, perturbations."""
from __future__ import annotations

import dataclasses
import enum
import itertools
import logging
import typing as t

import networkx as nx
import numpy as np

from .config import get_settings, pick
from .exceptions import ConfigError, InfeasiblePerturbation
from .graph import Edge, MixedGraph, build_graph
from .parallel import spawn_seeds
from .seeds import validate_iv_triple

logger = logging.getLogger(__name__)


class GraphFamily(str, enum.Enum):
    IV_STRUCTURED = 'IvStructured'
    ALL_MAXIMAL_CONFOUNDED = 'AllMaximalConfounded'
    ERDOS_RENYI = 'ErdosRenyi'


@dataclasses.dataclass(frozen=True)
class EnumerationConfig:
    n: int
    family: GraphFamily = GraphFamily.ERDOS_RENYI
    p_dir: t.Optional[float] = None
    p_bi: t.Optional[float] = None
    count: int = 1
    rng_seed: t.Optional[int] = None

    def __post_init__(self) -> None:
        cfg = get_settings().experiments
        object.__setattr__(self, 'p_dir', pick(self.p_dir, cfg.p_dir))
        object.__setattr__(self, 'p_bi', pick(self.p_bi, cfg.p_bi))
        object.__setattr__(self, 'rng_seed', pick(self.rng_seed, cfg.rng_seed))
        if self.n < 2:
            raise ConfigError(f'graph families need n >= 2, got {self.n}')
        for name in ('p_dir', 'p_bi'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f'{name} must lie in [0, 1], got {value}')
        if self.count < 0:
            raise ConfigError(f'count must be non-negative, got {self.count}')


# --- exhaustive enumeration --------------------------------------------------

def labeled_dags(n: int) -> t.Iterator[t.List[Edge]]:
    """Every labeled DAG on ``n`` nodes, each unordered pair absent or oriented one way."""
    pairs = list(itertools.combinations(range(n), 2))
    for choice in itertools.product((0, 1, 2), repeat=len(pairs)):
        directed = []
        for (a, b), c in zip(pairs, choice):
            if c == 1:
                directed.append((a, b))
            elif c == 2:
                directed.append((b, a))
        dag = nx.DiGraph(directed)
        dag.add_nodes_from(range(n))
        if nx.is_directed_acyclic_graph(dag):
            yield directed


def maximally_confounded(n: int, directed: t.Sequence[Edge]) -> MixedGraph:
    """Add a bidirected edge between every pair where neither node is an ancestor of the other."""
    g = build_graph(n, directed)
    bidirected = [
        (a, b)
        for a, b in itertools.combinations(range(n), 2)
        if a not in g.anc(b) and b not in g.anc(a)
    ]
    return build_graph(n, directed, bidirected)


def canonical_iv_triple(g: MixedGraph) -> t.Optional[t.Tuple[int, int, int]]:
    """First (Z, T, Y) in lexicographic order whose first stage validates.

    Triples that also pass the second-stage check are preferred.
    """
    first_stage = None
    for z, tt, y in itertools.permutations(g.nodes, 3):
        verdict = validate_iv_triple(g, z, tt, y)
        if verdict.t_to_y_ok:
            return (z, tt, y)
        if verdict.z_to_t_ok and first_stage is None:
            first_stage = (z, tt, y)
    return first_stage


def enumerate_all_maximal_confounded(n: int) -> t.Iterator[MixedGraph]:
    for directed in labeled_dags(n):
        yield maximally_confounded(n, directed)


def enumerate_iv_structured(n: int) -> t.Iterator[t.Tuple[MixedGraph, t.Tuple[int, int, int]]]:
    count = 0
    for g in enumerate_all_maximal_confounded(n):
        triple = canonical_iv_triple(g)
        if triple is not None:
            count += 1
            yield g, triple
    logger.info('enumerated %d IV-structured graph(s) on %d nodes', count, n)


# --- random graphs -----------------------------------------------------------

def random_mixed_graph(cfg: EnumerationConfig, rng: t.Optional[np.random.Generator] = None) -> MixedGraph:
    """Directed edges along a random topological order with p_dir; bidirected with p_bi."""
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    order = rng.permutation(cfg.n)
    directed = [
        (int(order[a]), int(order[b]))
        for a, b in itertools.combinations(range(cfg.n), 2)
        if rng.random() < cfg.p_dir
    ]
    bidirected = [
        (a, b) for a, b in itertools.combinations(range(cfg.n), 2)
        if rng.random() < cfg.p_bi
    ]
    return build_graph(cfg.n, directed, bidirected)


def random_graphs(cfg: EnumerationConfig) -> t.Iterator[MixedGraph]:
    """``cfg.count`` graphs, each from its own stream spawned off the root seed."""
    for stream in spawn_seeds(cfg.rng_seed, cfg.count):
        yield random_mixed_graph(cfg, np.random.default_rng(stream))


def generate(cfg: EnumerationConfig) -> t.Iterator[MixedGraph]:
    if cfg.family is GraphFamily.IV_STRUCTURED:
        return (g for g, _ in enumerate_iv_structured(cfg.n))
    if cfg.family is GraphFamily.ALL_MAXIMAL_CONFOUNDED:
        return enumerate_all_maximal_confounded(cfg.n)
    return random_graphs(cfg)


# --- perturbation ------------------------------------------------------------

class PerturbationKind(str, enum.Enum):
    MISSING_DIRECTED = 'MissingDirected'
    EXTRA_DIRECTED = 'ExtraDirected'
    MISSING_CONFOUNDER = 'MissingConfounder'
    EXTRA_CONFOUNDER = 'ExtraConfounder'


@dataclasses.dataclass(frozen=True)
class Perturbation:
    kind: PerturbationKind
    rate: float

    def __post_init__(self) -> None:
        if not 0.0 < self.rate < 1.0:
            raise ConfigError(f'perturbation rate must lie in (0, 1), got {self.rate}')

    def size(self, g: MixedGraph) -> int:
        """rate * |edges of the perturbed kind|, rounded half up, at least one when any exist."""
        if self.kind in (PerturbationKind.MISSING_DIRECTED, PerturbationKind.EXTRA_DIRECTED):
            m = len(g.directed)
        else:
            m = len(g.bidirected)
        if m == 0:
            return 0
        return max(1, int(np.floor(self.rate * m + 0.5)))


def _add_directed(g: MixedGraph, k: int, rng: np.random.Generator) -> MixedGraph:
    dag = g.to_networkx()
    candidates = [(j, i) for j, i in itertools.permutations(g.nodes, 2) if not dag.has_edge(j, i)]
    added: t.List[Edge] = []
    for idx in rng.permutation(len(candidates)):
        if len(added) == k:
            break
        j, i = candidates[idx]
        if nx.has_path(dag, i, j):
            continue
        dag.add_edge(j, i)
        added.append((j, i))
    if len(added) < k:
        raise InfeasiblePerturbation(PerturbationKind.EXTRA_DIRECTED.value, f'only {len(added)} acyclic addition(s) available, {k} requested')
    return g.with_edges(add_directed=added)


def perturb(g: MixedGraph, perturbation: Perturbation, rng_seed: t.Any = None) -> MixedGraph:
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    k = perturbation.size(g)
    if k == 0:
        if perturbation.kind in (PerturbationKind.MISSING_DIRECTED, PerturbationKind.MISSING_CONFOUNDER):
            raise InfeasiblePerturbation(perturbation.kind.value, 'no edges of that kind to remove')
        return g

    kind = perturbation.kind
    if kind is PerturbationKind.MISSING_DIRECTED:
        edges = g.edges()
        drop = [edges[i] for i in sorted(rng.choice(len(edges), size=k, replace=False))]
        return g.with_edges(remove_directed=drop)
    if kind is PerturbationKind.MISSING_CONFOUNDER:
        edges = g.bidirected_edges()
        drop = [edges[i] for i in sorted(rng.choice(len(edges), size=k, replace=False))]
        return g.with_edges(remove_bidirected=drop)
    if kind is PerturbationKind.EXTRA_DIRECTED:
        return _add_directed(g, k, rng)

    free = [(a, b) for a, b in itertools.combinations(g.nodes, 2) if not g.has_bidirected(a, b)]
    if len(free) < k:
        raise InfeasiblePerturbation(kind.value, f'only {len(free)} unconfounded pair(s) left, {k} requested')
    add = [free[i] for i in sorted(rng.choice(len(free), size=k, replace=False))]
    return g.with_edges(add_bidirected=add)
