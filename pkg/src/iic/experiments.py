"""Experiment registry: each entry turns a graph family into a results table.

Usage (through the CLI):
  iic bench seed_sources --n 4 --out seed_sources.csv
  iic bench interventions --n 6 --k 2 --graphs 1881 --jobs 8 --out interventions.csv

Every runner returns a pandas DataFrame. Per-graph work goes through
``parallel_map`` with module-level workers; each random graph draws from its
own ``SeedSequence`` child of the root seed, so tables do not depend on the
worker count. Run-level aggregates (means, shares) are stored in
``frame.attrs`` and end up in the CSV header.
"""
from __future__ import annotations

import dataclasses
import logging
import time
import typing as t

import numpy as np
import pandas as pd

from .closure import ClosureRequest, ClosureResult, gap_profile, iic_close, propagation_gain
from .config import Settings, get_settings, pick
from .estimate import iic_estimate, ols_baseline, simulate_data, tsls_baseline
from .exceptions import GraphTooLarge, InfeasiblePerturbation, UnknownExperiment
from .fixtures import get_fixture
from .generators import (
    EnumerationConfig,
    GraphFamily,
    Perturbation,
    PerturbationKind,
    canonical_iv_triple,
    enumerate_all_maximal_confounded,
    enumerate_iv_structured,
    perturb,
    random_mixed_graph,
)
from .graph import Edge, EdgeStatus, MixedGraph
from .halftrek import HalfTrek, Witness
from .htc import htc_check
from .oracle import oracle_verdicts
from .parallel import parallel_map, spawn_seeds
from .seeds import SeedSpec, resolve_seeds

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 5


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by all experiments; None falls back to the registry default."""

    n: t.Optional[int] = None
    k: t.Optional[int] = None
    graphs: t.Optional[int] = None
    family: t.Optional[GraphFamily] = None
    p_dir: t.Optional[float] = None
    p_bi: t.Optional[float] = None
    rng_seed: t.Optional[int] = None
    jobs: int = 1
    trials: t.Optional[int] = None
    rates: t.Optional[t.Tuple[float, ...]] = None
    sample_sizes: t.Optional[t.Tuple[int, ...]] = None
    replications: t.Optional[int] = None
    n_boot: t.Optional[int] = None


class Experiment(t.NamedTuple):
    """A runner with its registry defaults.

    A callable default is evaluated on the otherwise resolved config, so it
    can depend on ``n``.
    """

    run: t.Callable[[ExperimentConfig, Settings], pd.DataFrame]
    description: str
    defaults: t.Mapping[str, t.Any]


# --- AD baseline -------------------------------------------------------------

def ad_htc_baseline(g: MixedGraph, i: int) -> t.Optional[Witness]:
    """Standard HTC on the ancestral subgraph of ``i``, mapped back to ``g``'s ids."""
    sub, old = g.ancestral_subgraph(i)
    witness = htc_check(sub, old.index(i))
    if witness is None:
        return None
    system = {
        old[target]: HalfTrek(old[trek.source], old[trek.target], trek.kind, tuple(old[v] for v in trek.path_nodes))
        for target, trek in witness.system.items()
    }
    return Witness(node=i, sources=tuple(old[w] for w in witness.sources), system=system)


# --- shared helpers ----------------------------------------------------------

def _close(g: MixedGraph, spec: t.Optional[SeedSpec] = None) -> ClosureResult:
    return iic_close(ClosureRequest(graph=g, seed=resolve_seeds(g, spec)))


def _rate(num: float, den: float) -> float:
    return 100.0 * num / den if den else float('nan')


def _exhaustive(cfg: ExperimentConfig) -> t.List[t.Tuple[MixedGraph, t.Optional[t.Tuple[int, int, int]]]]:
    if cfg.n > EXHAUSTIVE_LIMIT:
        raise GraphTooLarge(cfg.n, EXHAUSTIVE_LIMIT)
    if cfg.family is GraphFamily.IV_STRUCTURED:
        return list(enumerate_iv_structured(cfg.n))
    return [(g, canonical_iv_triple(g)) for g in enumerate_all_maximal_confounded(cfg.n)]


def _random_instance(n: int, p_dir: float, p_bi: float, stream: np.random.SeedSequence) -> t.Tuple[MixedGraph, np.random.Generator]:
    """The graph for one seed stream; the generator continues for per-graph choices."""
    rng = np.random.default_rng(stream)
    return random_mixed_graph(EnumerationConfig(n=n, p_dir=p_dir, p_bi=p_bi), rng), rng


def _random_tasks(cfg: ExperimentConfig, *extra: t.Any) -> t.List[t.Tuple]:
    return [(cfg.n, cfg.p_dir, cfg.p_bi, stream) + extra for stream in spawn_seeds(cfg.rng_seed, cfg.graphs)]


def _pick_nodes(rng: np.random.Generator, n: int, k: int) -> t.FrozenSet[int]:
    return frozenset(int(v) for v in rng.choice(n, size=min(k, n), replace=False))


def _instances(cfg: ExperimentConfig) -> t.List[t.Tuple[MixedGraph, t.Optional[t.Tuple[int, int, int]]]]:
    if cfg.family is GraphFamily.ERDOS_RENYI:
        graphs = [
            _random_instance(cfg.n, cfg.p_dir, cfg.p_bi, s)[0]
            for s in spawn_seeds(cfg.rng_seed, cfg.graphs)
        ]
        return [(g, canonical_iv_triple(g)) for g in graphs]
    return _exhaustive(cfg)


def _iv_spec(triple: t.Optional[t.Tuple[int, int, int]]) -> SeedSpec:
    return SeedSpec(iv_triples=(triple,)) if triple is not None else SeedSpec()


# --- seed_sources ------------------------------------------------------------

_SEED_SOURCES = ('none', 'iv', 'exogenous', 'iv+exogenous')


def _seed_sources_worker(item: t.Tuple[MixedGraph, t.Optional[t.Tuple[int, int, int]]]) -> t.Dict[str, int]:
    g, triple = item
    iv = _iv_spec(triple)
    specs = {
        'none': SeedSpec(),
        'iv': iv,
        'exogenous': SeedSpec(exogenous=True),
        'iv+exogenous': iv.union(SeedSpec(exogenous=True)),
    }
    return {name: len(_close(g, spec).identified_set) for name, spec in specs.items()}


def _seed_sources(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    instances = _instances(cfg)
    counts = parallel_map(_seed_sources_worker, instances, cfg.jobs)
    edges = sum(len(g.directed) for g, _ in instances)
    rows = [
        {
            'source': name,
            'graphs': len(instances),
            'edges': edges,
            'identified': sum(c[name] for c in counts),
            'rate_pct': _rate(sum(c[name] for c in counts), edges),
        }
        for name in _SEED_SOURCES
    ]
    return pd.DataFrame(rows)


# --- interventions -----------------------------------------------------------

def _interventions_worker(task: t.Tuple) -> t.Dict[str, int]:
    n, p_dir, p_bi, stream, k = task
    g, rng = _random_instance(n, p_dir, p_bi, stream)
    seeded_spec = SeedSpec(intervened=_pick_nodes(rng, n, k))
    seeded = _close(g, seeded_spec)
    return {
        'edges': len(g.directed),
        'unseeded': len(_close(g).identified_set),
        'seeds only': len(seeded.seed),
        'iic': len(seeded.identified_set),
    }


def _per_graph_stats(counts: t.Sequence[t.Mapping[str, int]], key: str) -> t.Tuple[float, float]:
    rates = [100.0 * c[key] / c['edges'] for c in counts if c['edges']]
    if not rates:
        return float('nan'), float('nan')
    return float(np.mean(rates)), float(np.std(rates))


def _interventions(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    counts = parallel_map(_interventions_worker, _random_tasks(cfg, cfg.k), cfg.jobs)
    edges = sum(c['edges'] for c in counts)
    rows = []
    for key, method in (('unseeded', 'unseeded'), ('seeds only', 'seeds only'), ('iic', f'iic (k={cfg.k})')):
        mean, std = _per_graph_stats(counts, key)
        identified = sum(c[key] for c in counts)
        rows.append({
            'method': method,
            'graphs': len(counts),
            'edges': edges,
            'identified': identified,
            'rate_pct': _rate(identified, edges),
            'graph_rate_mean': mean,
            'graph_rate_std': std,
        })
    return pd.DataFrame(rows)


# --- ad_compare --------------------------------------------------------------

def _node_level(g: MixedGraph, check: t.Callable[[MixedGraph, int], t.Optional[Witness]]) -> t.Set[Edge]:
    out: t.Set[Edge] = set()
    for i in g.nodes:
        if g.pa(i) and check(g, i) is not None:
            out |= {(p, i) for p in g.pa(i)}
    return out


def _ad_compare_worker(item: t.Tuple[MixedGraph, t.Any]) -> t.Dict[str, int]:
    g, _ = item
    ad = _node_level(g, ad_htc_baseline)
    htc = _node_level(g, htc_check)
    iic = set(_close(g).identified_set)
    return {
        'edges': len(g.directed),
        'ad': len(ad),
        'htc': len(htc),
        'iic': len(iic),
        'ad_only': len(ad - iic),
        'ad_beyond_htc': len(ad - htc),
    }


def _ad_compare(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    instances = _instances(cfg)
    counts = parallel_map(_ad_compare_worker, instances, cfg.jobs)
    row = {'graphs': len(instances)}
    for key in ('edges', 'ad', 'htc', 'iic', 'ad_only', 'ad_beyond_htc'):
        row[key] = sum(c[key] for c in counts)
    if row['ad_only']:
        logger.warning('%d edge(s) identified by the ancestral baseline but not by the closure', row['ad_only'])
    return pd.DataFrame([row])


# --- convergence -------------------------------------------------------------

def _convergence_worker(item: t.Tuple[MixedGraph, t.Optional[t.Tuple[int, int, int]]]) -> int:
    g, triple = item
    return _close(g, _iv_spec(triple)).iterations


def _convergence(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    iterations = parallel_map(_convergence_worker, _instances(cfg), cfg.jobs)
    frame = (
        pd.Series(iterations, name='iterations', dtype=int)
        .value_counts()
        .sort_index()
        .rename_axis('iterations')
        .reset_index(name='graphs')
    )
    frame['share'] = frame['graphs'] / max(len(iterations), 1)
    if iterations:
        frame.attrs['mean_iterations'] = round(float(np.mean(iterations)), 4)
        frame.attrs['max_iterations'] = int(np.max(iterations))
    return frame


# --- precision ---------------------------------------------------------------

def _precision_worker(task: t.Tuple) -> t.Dict[str, int]:
    g, triple, trials, stream, settings = task
    unseeded = _close(g)
    seeded = _close(g, _iv_spec(triple))
    new = sorted(seeded.identified_set - unseeded.identified_set)
    non_id = seeded.by_status(EdgeStatus.NON_IDENTIFIABLE)
    gap = seeded.by_status(EdgeStatus.INCONCLUSIVE)
    checked = sorted(set(new) | set(non_id) | set(gap))
    verdict = oracle_verdicts(g, checked, trials=trials, rng_seed=np.random.default_rng(stream), settings=settings) if checked else {}
    return {
        'edges': len(g.directed),
        'new': len(new),
        'new_confirmed': sum(verdict[e] for e in new),
        'non_id': len(non_id),
        'non_id_confirmed': sum(not verdict[e] for e in non_id),
        'inconclusive': len(gap),
        'inconclusive_identifiable': sum(verdict[e] for e in gap),
    }


def _precision(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    instances = _instances(cfg)
    streams = spawn_seeds(cfg.rng_seed, len(instances))
    tasks = [(g, triple, cfg.trials, s, settings) for (g, triple), s in zip(instances, streams)]
    counts = parallel_map(_precision_worker, tasks, cfg.jobs)
    row = {'graphs': len(instances)}
    for key in ('edges', 'new', 'new_confirmed', 'non_id', 'non_id_confirmed', 'inconclusive', 'inconclusive_identifiable'):
        row[key] = sum(c[key] for c in counts)
    row['precision'] = row['new_confirmed'] / row['new'] if row['new'] else float('nan')
    if row['new_confirmed'] < row['new']:
        logger.warning('oracle rejects %d newly identified edge(s)', row['new'] - row['new_confirmed'])
    return pd.DataFrame([row])


# --- completeness ------------------------------------------------------------

_CONDITIONS: t.Dict[str, t.Callable[[MixedGraph], bool]] = {
    'all': lambda g: True,
    'parent-sibling separated': lambda g: all(not (g.pa(i) & g.sib(i)) for i in g.nodes),
    'has a bow': lambda g: any(g.pa(i) & g.sib(i) for i in g.nodes),
    'unconfounded': lambda g: not g.bidirected,
}


def _completeness_worker(item: t.Tuple[MixedGraph, t.Any]) -> t.Dict[str, t.Any]:
    g, _ = item
    summary = _close(g).summary()
    out: t.Dict[str, t.Any] = {name: cond(g) for name, cond in _CONDITIONS.items()}
    out.update(summary)
    return out


def _completeness(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    records = parallel_map(_completeness_worker, _instances(cfg), cfg.jobs)
    rows = []
    for name in _CONDITIONS:
        chosen = [r for r in records if r[name]]
        edges = sum(r['total'] for r in chosen)
        gap = sum(r[EdgeStatus.INCONCLUSIVE.value] for r in chosen)
        rows.append({
            'condition': name,
            'graphs': len(chosen),
            'edges': edges,
            'identified': sum(r[EdgeStatus.IDENTIFIED.value] for r in chosen),
            'non_identifiable': sum(r[EdgeStatus.NON_IDENTIFIABLE.value] for r in chosen),
            'gap': gap,
            'gap_pct': _rate(gap, edges),
        })
    return pd.DataFrame(rows)


# --- gap_structure -----------------------------------------------------------

def _gap_structure_worker(item: t.Tuple[MixedGraph, t.Any]) -> t.List[t.Tuple[int, int]]:
    g, _ = item
    return [(rec.r_size, rec.r_sib_overlap) for rec in gap_profile(g, _close(g))]


def _gap_structure(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    profiles = parallel_map(_gap_structure_worker, _instances(cfg), cfg.jobs)
    flat = [p for profile in profiles for p in profile]
    columns = ['r_size', 'r_sib_overlap', 'edges', 'law_holds']
    if not flat:
        return pd.DataFrame(columns=columns)
    frame = (
        pd.DataFrame(flat, columns=['r_size', 'r_sib_overlap'])
        .value_counts()
        .sort_index()
        .reset_index(name='edges')
    )
    frame['law_holds'] = (frame['r_size'] >= 2) & (frame['r_sib_overlap'] >= 1)
    frame.attrs['inconclusive_edges'] = len(flat)
    frame.attrs['law_share'] = round(float(frame.loc[frame['law_holds'], 'edges'].sum()) / len(flat), 4)
    return frame[columns]


# --- scalability -------------------------------------------------------------

def _scalability_worker(task: t.Tuple) -> t.Dict[str, t.Any]:
    n, p_dir, p_bi, stream, k = task
    g, rng = _random_instance(n, p_dir, p_bi, stream)
    spec = SeedSpec(intervened=_pick_nodes(rng, n, k))
    start = time.perf_counter()
    seeded = _close(g, spec)
    elapsed = time.perf_counter() - start
    unseeded = _close(g)
    edges = len(g.directed)
    return {
        'n': n,
        'k': k,
        'edges': edges,
        'unseeded_rate_pct': _rate(len(unseeded.identified_set), edges),
        'iic_rate_pct': _rate(len(seeded.identified_set), edges),
        'iterations': seeded.iterations,
        'seconds': round(elapsed, 3),
    }


def _one_per_five_nodes(cfg: ExperimentConfig) -> int:
    return max(1, cfg.n // 5)


def _scalability(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    rows = parallel_map(_scalability_worker, _random_tasks(cfg, cfg.k), cfg.jobs)
    frame = pd.DataFrame(rows)
    frame.insert(0, 'graph', range(len(rows)))
    return frame


# --- seed_tradeoff -----------------------------------------------------------

def _seed_tradeoff_worker(task: t.Tuple) -> t.List[int]:
    n, p_dir, p_bi, stream, k_max = task
    g, rng = _random_instance(n, p_dir, p_bi, stream)
    order = [int(v) for v in rng.permutation(n)]
    return [len(g.directed)] + [
        len(_close(g, SeedSpec(intervened=frozenset(order[:k]))).identified_set)
        for k in range(k_max + 1)
    ]


def _seed_tradeoff(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    counts = parallel_map(_seed_tradeoff_worker, _random_tasks(cfg, cfg.k), cfg.jobs)
    edges = sum(c[0] for c in counts)
    rows = []
    for k in range(cfg.k + 1):
        identified = sum(c[k + 1] for c in counts)
        rows.append({'k': k, 'graphs': len(counts), 'edges': edges, 'identified': identified, 'rate_pct': _rate(identified, edges)})
    return pd.DataFrame(rows)


# --- robustness --------------------------------------------------------------

def _robustness_worker(task: t.Tuple) -> t.List[t.Tuple[str, float, int, int, int, bool]]:
    n, p_dir, p_bi, stream, k, rates = task
    g, rng = _random_instance(n, p_dir, p_bi, stream)
    spec = SeedSpec(intervened=_pick_nodes(rng, n, k))
    truth = _close(g, spec).identified_set
    out = []
    for kind in PerturbationKind:
        for rate in rates:
            try:
                wrong = perturb(g, Perturbation(kind, rate), rng)
            except InfeasiblePerturbation:
                out.append((kind.value, rate, 0, 0, 0, True))
                continue
            # scored on the directed edges both graphs share
            shared = g.directed & wrong.directed
            found = _close(wrong, spec).identified_set & shared
            right = truth & shared
            out.append((kind.value, rate, len(found & right), len(found - right), len(right - found), False))
    return out


def _robustness(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    results = parallel_map(_robustness_worker, _random_tasks(cfg, cfg.k, tuple(cfg.rates)), cfg.jobs)
    frame = pd.DataFrame(
        [r for per_graph in results for r in per_graph],
        columns=['kind', 'rate', 'tp', 'fp', 'fn', 'skipped'],
    )
    rows = []
    for (kind, rate), block in frame.groupby(['kind', 'rate'], sort=False):
        used = block[~block['skipped']]
        tp, fp, fn = int(used['tp'].sum()), int(used['fp'].sum()), int(used['fn'].sum())
        rows.append({
            'kind': kind,
            'rate': rate,
            'graphs': len(used),
            'skipped': int(block['skipped'].sum()),
            'precision': tp / (tp + fp) if tp + fp else float('nan'),
            'recall': tp / (tp + fn) if tp + fn else float('nan'),
        })
    return pd.DataFrame(rows)


# --- amplification -----------------------------------------------------------

def _amplification_worker(task: t.Tuple) -> t.List[t.Optional[t.Tuple[float, int]]]:
    n, p_dir, p_bi, stream, k_max = task
    g, rng = _random_instance(n, p_dir, p_bi, stream)
    order = [int(v) for v in rng.permutation(n)]
    unseeded = _close(g)
    out: t.List[t.Optional[t.Tuple[float, int]]] = []
    for k in range(1, k_max + 1):
        result = _close(g, SeedSpec(intervened=frozenset(order[:k])))
        if not result.seed.edges:
            out.append(None)
            continue
        out.append((propagation_gain(result, result.seed, unseeded), len(result.seed)))
    return out


def _amplification(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    results = parallel_map(_amplification_worker, _random_tasks(cfg, cfg.k), cfg.jobs)
    rows = []
    for k in range(1, cfg.k + 1):
        samples = [r[k - 1] for r in results if r[k - 1] is not None]
        gains = np.array([s[0] for s in samples], dtype=float)
        rows.append({
            'k': k,
            'graphs': len(samples),
            'seed_edges_mean': float(np.mean([s[1] for s in samples])) if samples else float('nan'),
            'gain_mean': float(gains.mean()) if gains.size else float('nan'),
            'gain_std': float(gains.std()) if gains.size else float('nan'),
            'gain_median': float(np.median(gains)) if gains.size else float('nan'),
            'gain_max': float(gains.max()) if gains.size else float('nan'),
        })
    return pd.DataFrame(rows)


# --- estimation --------------------------------------------------------------

def _estimation_worker(task: t.Tuple) -> t.Dict[str, t.Any]:
    name, n, stream, n_boot, settings = task
    fx = get_fixture(name)
    rng = np.random.default_rng(stream)
    data = simulate_data(fx.params, n, rng, fx.seeds.intervened)
    result = iic_estimate(
        fx.graph, data, fx.seeds, n_boot=n_boot, rng_seed=int(rng.integers(2**62)), settings=settings,
    )
    return {'estimates': result.estimates, 'ci': result.ci}


def _estimation_table(name: str, cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    fx = get_fixture(name)
    rows = []
    for n in cfg.sample_sizes:
        streams = spawn_seeds(cfg.rng_seed + n, cfg.replications)
        reps = parallel_map(_estimation_worker, [(name, n, s, cfg.n_boot, settings) for s in streams], cfg.jobs)
        for edge in fx.graph.edges():
            truth = float(fx.params.B[edge])
            values = np.array([r['estimates'][edge] for r in reps if edge in r['estimates']])
            if values.size == 0:
                continue
            intervals = [r['ci'][edge] for r in reps if edge in r['ci']]
            covered = [lo <= truth <= hi for lo, hi in intervals]
            rmse = float(np.sqrt(np.mean((values - truth) ** 2)))
            rows.append({
                'n': n,
                'edge': fx.graph.edge_label(edge),
                'truth': truth,
                'replications': int(values.size),
                'bias': float(values.mean() - truth),
                'rmse': rmse,
                'rmse_sqrt_n': rmse * np.sqrt(n),
                'coverage': float(np.mean(covered)) if covered else float('nan'),
            })
    return pd.DataFrame(rows)


def _estimation(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    return _estimation_table('five_node_estimation', cfg, settings)


# --- baselines ---------------------------------------------------------------

def _baselines_worker(task: t.Tuple) -> t.Dict[str, t.Dict[Edge, float]]:
    name, n, stream, settings = task
    fx = get_fixture(name)
    data = simulate_data(fx.params, n, np.random.default_rng(stream), fx.seeds.intervened)
    out = {
        'iic': iic_estimate(fx.graph, data, fx.seeds, n_boot=0, settings=settings).estimates,
        'ols': ols_baseline(fx.graph, data),
        '2sls': {},
    }
    for triple in fx.seeds.iv_triples:
        value = tsls_baseline(fx.graph, data, triple)
        if value is not None:
            out['2sls'][(triple[1], triple[2])] = value
    return out


def _baselines(cfg: ExperimentConfig, settings: Settings) -> pd.DataFrame:
    name = 'six_node_estimation'
    fx = get_fixture(name)
    rows = []
    for n in cfg.sample_sizes:
        streams = spawn_seeds(cfg.rng_seed + n, cfg.replications)
        reps = parallel_map(_baselines_worker, [(name, n, s, settings) for s in streams], cfg.jobs)
        for method in ('iic', '2sls', 'ols'):
            for edge in fx.graph.edges():
                values = np.array([r[method][edge] for r in reps if edge in r[method]])
                if values.size == 0:
                    continue
                truth = float(fx.params.B[edge])
                rows.append({
                    'n': n,
                    'method': method,
                    'edge': fx.graph.edge_label(edge),
                    'truth': truth,
                    'mean': float(values.mean()),
                    'bias': float(values.mean() - truth),
                    'rmse': float(np.sqrt(np.mean((values - truth) ** 2))),
                })
    return pd.DataFrame(rows)


# --- registry ----------------------------------------------------------------

_RANDOM = {'family': GraphFamily.ERDOS_RENYI, 'n': 6, 'graphs': 200}
_EXHAUSTIVE_IV = {'family': GraphFamily.IV_STRUCTURED, 'n': 4}

EXPERIMENTS: t.Dict[str, Experiment] = {
    'seed_sources': Experiment(_seed_sources, 'identification under different seed sources', _EXHAUSTIVE_IV),
    'interventions': Experiment(_interventions, 'random graphs with k intervened nodes', {**_RANDOM, 'k': 1}),
    'ad_compare': Experiment(_ad_compare, 'ancestral-subgraph baseline against HTC and the closure', _EXHAUSTIVE_IV),
    'convergence': Experiment(_convergence, 'closure sweeps until the fixed point, IV seeds', _EXHAUSTIVE_IV),
    'precision': Experiment(_precision, 'oracle check of newly identified and unresolved edges', _EXHAUSTIVE_IV),
    'completeness': Experiment(_completeness, 'remaining gap per graph-class condition', {**_RANDOM, 'n': 5, 'graphs': 300}),
    'gap_structure': Experiment(_gap_structure, '|R| and |R & sib| of inconclusive edges', {**_RANDOM, 'graphs': 300}),
    'scalability': Experiment(_scalability, 'runtime on large random graphs, k = n/5', {**_RANDOM, 'n': 100, 'graphs': 3, 'k': _one_per_five_nodes}),
    'seed_tradeoff': Experiment(_seed_tradeoff, 'identification rate against the number of intervened nodes', {**_RANDOM, 'k': 3}),
    'robustness': Experiment(
        _robustness, 'precision and recall under graph misspecification',
        {**_RANDOM, 'graphs': 100, 'k': 1, 'rates': (0.1, 0.2, 0.3)},
    ),
    'amplification': Experiment(_amplification, 'propagation gain per seed edge', {**_RANDOM, 'k': 2}),
    'estimation': Experiment(
        _estimation, 'RMSE and CI coverage on the five-node fixture',
        {'sample_sizes': (100, 1000, 10000), 'replications': 50, 'n_boot': 50},
    ),
    'baselines': Experiment(
        _baselines, 'plug-in estimates against 2SLS and OLS on the six-node fixture',
        {'sample_sizes': (5000,), 'replications': 50},
    ),
}


def _resolve(entry: Experiment, cfg: ExperimentConfig, settings: Settings) -> ExperimentConfig:
    exp = settings.experiments
    filled = {
        'n': 4,
        'k': 1,
        'graphs': 100,
        'family': GraphFamily.ERDOS_RENYI,
        'p_dir': exp.p_dir,
        'p_bi': exp.p_bi,
        'rng_seed': exp.rng_seed,
        'trials': settings.oracle.trials,
        'rates': (0.1, 0.2, 0.3),
        'sample_sizes': (1000,),
        'replications': 50,
        'n_boot': settings.estimate.n_boot,
    }
    filled.update(entry.defaults)
    derived = {name: default for name, default in filled.items() if callable(default)}
    resolved = dataclasses.replace(
        cfg, **{name: pick(getattr(cfg, name), default) for name, default in filled.items() if name not in derived}
    )
    return dataclasses.replace(
        resolved, **{name: pick(getattr(cfg, name), rule(resolved)) for name, rule in derived.items()}
    )


def run_experiment(
    name: str, config: t.Optional[ExperimentConfig] = None, settings: t.Optional[Settings] = None
) -> pd.DataFrame:
    if name not in EXPERIMENTS:
        raise UnknownExperiment(name, EXPERIMENTS)
    settings = settings or get_settings()
    entry = EXPERIMENTS[name]
    cfg = _resolve(entry, config or ExperimentConfig(), settings)
    logger.info('running %s (%s) with rng seed %d', name, entry.description, cfg.rng_seed)
    start = time.perf_counter()
    frame = entry.run(cfg, settings)
    frame.attrs['experiment'] = name
    frame.attrs['rng_seed'] = cfg.rng_seed
    logger.info('%s finished in %.1fs: %d row(s)', name, time.perf_counter() - start, len(frame))
    return frame
