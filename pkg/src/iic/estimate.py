"""Finite-sample plug-in estimation along the identification certificate.

Phase 1 estimates seed edges with their closed-form estimators. Phase 2
replays every closure witness as a linear system in the sample covariance,
solving a node as soon as the coefficients it depends on are available.
Phase 3 bootstraps rows (stratified by regime) through the same witnesses.

Regime tags: ``-1`` marks observational rows, any other value is the node
that was intervened on.
"""
from __future__ import annotations

import dataclasses
import logging
import typing as t

import numpy as np
import pandas as pd
from scipy import stats

from .closure import ClosureRequest, ClosureResult, iic_close
from .config import Settings, get_settings, pick
from .exceptions import (
    IllConditionedSystem,
    MissingRegimeData,
    SingularDesign,
    TooFewSamples,
    WeakInstrument,
)
from .graph import Edge, MixedGraph
from .halftrek import Witness
from .oracle import ParamRealization, implied_cov
from .parallel import parallel_map, spawn_seeds
from .seeds import EstimatorTag, SeedSet, SeedSpec, resolve_seeds, validate_iv_triple

logger = logging.getLogger(__name__)

OBSERVATIONAL = -1
REGIME_COLUMN = '__regime'


@dataclasses.dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    regime: t.Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if not np.all(np.isfinite(X)):
            raise ValueError('data contains non-finite entries')
        regime = np.full(X.shape[0], OBSERVATIONAL, dtype=int) if self.regime is None else np.asarray(self.regime, dtype=int)
        if regime.shape != (X.shape[0],):
            raise ValueError('one regime tag per sample is required')
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'regime', regime)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.X.shape[1]

    def regimes(self) -> t.List[int]:
        return sorted(int(r) for r in np.unique(self.regime))

    def rows(self, regime: int = OBSERVATIONAL) -> np.ndarray:
        return self.X[self.regime == regime]

    def resample(self, rng: np.random.Generator) -> 'Dataset':
        """Bootstrap replicate drawn with replacement inside each regime."""
        parts, tags = [], []
        for r in self.regimes():
            block = self.rows(r)
            parts.append(block[rng.integers(0, block.shape[0], size=block.shape[0])])
            tags.append(np.full(block.shape[0], r, dtype=int))
        return Dataset(np.vstack(parts), np.concatenate(tags))

    def to_frame(self, labels: t.Sequence[str]) -> pd.DataFrame:
        frame = pd.DataFrame(self.X, columns=list(labels))
        if np.any(self.regime != OBSERVATIONAL):
            frame[REGIME_COLUMN] = self.regime
        return frame

    @classmethod
    def stack(cls, parts: t.Sequence['Dataset']) -> 'Dataset':
        return cls(np.vstack([p.X for p in parts]), np.concatenate([p.regime for p in parts]))


def sample_cov(X: t.Union[np.ndarray, Dataset], min_samples: int = 2) -> np.ndarray:
    """Unbiased covariance of the column-centered data."""
    data = X.rows() if isinstance(X, Dataset) else np.atleast_2d(np.asarray(X, dtype=float))
    if data.shape[0] < min_samples:
        raise TooFewSamples(data.shape[0], min_samples)
    return np.atleast_2d(np.cov(data, rowvar=False, ddof=1))


def regime_params(p: ParamRealization, v: int) -> ParamRealization:
    """Realization after replacing node ``v`` by an independent standard normal."""
    B = p.B.copy()
    omega = p.omega.copy()
    B[:, v] = 0.0
    omega[v, :] = 0.0
    omega[:, v] = 0.0
    omega[v, v] = 1.0
    return ParamRealization(B=B, omega=omega)


def simulate_data(
    p: ParamRealization,
    n: int,
    rng_seed: t.Any = None,
    intervened: t.Optional[t.Iterable[int]] = None,
) -> Dataset:
    """``n`` Gaussian observational samples plus ``n`` per intervened node."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    parts = []
    for regime in [OBSERVATIONAL] + sorted(intervened or ()):
        q = p if regime == OBSERVATIONAL else regime_params(p, regime)
        eps = rng.standard_normal((n, q.n_nodes)) @ np.linalg.cholesky(q.omega).T
        parts.append(Dataset(eps @ q.total_effects(), np.full(n, regime, dtype=int)))
    return Dataset.stack(parts)


# --- results -----------------------------------------------------------------

class SolveDiagnostic(t.NamedTuple):
    step: int
    node: int
    edges: t.Tuple[Edge, ...]
    kappa: float
    gamma: float
    depth: int
    upstream: t.Tuple[int, ...]


class PropagationReport(t.NamedTuple):
    depth: int
    steps: t.Tuple[t.Tuple[float, float], ...]
    c_d: float


@dataclasses.dataclass(frozen=True)
class EstimateResult:
    graph: MixedGraph
    estimates: t.Dict[Edge, float]
    se: t.Dict[Edge, float] = dataclasses.field(default_factory=dict)
    ci: t.Dict[Edge, t.Tuple[float, float]] = dataclasses.field(default_factory=dict)
    diagnostics: t.Tuple[SolveDiagnostic, ...] = ()
    unestimated: t.Dict[Edge, str] = dataclasses.field(default_factory=dict)
    depth: t.Dict[Edge, int] = dataclasses.field(default_factory=dict)
    origin: t.Dict[Edge, str] = dataclasses.field(default_factory=dict)
    n_boot: int = 0

    def to_frame(self) -> pd.DataFrame:
        g = self.graph
        records = []
        for edge in sorted(set(self.estimates) | set(self.unestimated)):
            lo, hi = self.ci.get(edge, (np.nan, np.nan))
            records.append({
                'edge': g.edge_label(edge),
                'estimate': self.estimates.get(edge, np.nan),
                'se': self.se.get(edge, np.nan),
                'ci_lo': lo,
                'ci_hi': hi,
                'source': self.origin.get(edge, ''),
                'depth': self.depth.get(edge, -1),
                'note': self.unestimated.get(edge, ''),
            })
        return pd.DataFrame.from_records(
            records, columns=['edge', 'estimate', 'se', 'ci_lo', 'ci_hi', 'source', 'depth', 'note'],
        )


# --- point estimation --------------------------------------------------------

class _Pass(t.NamedTuple):
    estimates: t.Dict[Edge, float]
    unestimated: t.Dict[Edge, str]
    diagnostics: t.List[SolveDiagnostic]
    depth: t.Dict[Edge, int]
    origin: t.Dict[Edge, str]


class _PlugIn:
    """One pass of Phases 1 and 2 over a fixed set of regime covariances."""

    def __init__(self, g: MixedGraph, closure: ClosureResult, seeds: SeedSet, settings: Settings, strict: bool = False):
        self.g = g
        self.closure = closure
        self.seeds = seeds
        self.cfg = settings.estimate
        self.strict = strict

    def run(self, covs: t.Mapping[int, np.ndarray]) -> _Pass:
        self.covs = covs
        self.est: t.Dict[Edge, float] = {}
        self.skip: t.Dict[Edge, str] = {}
        self.depth: t.Dict[Edge, int] = {}
        self.step_of: t.Dict[Edge, int] = {}
        self.origin: t.Dict[Edge, str] = {}
        self.diags: t.List[SolveDiagnostic] = []

        pending_seeds = self._phase_one()
        pending_nodes = self._pending_witnesses()
        progress = True
        while progress and (pending_seeds or pending_nodes):
            progress = False
            for edge in list(pending_seeds):
                if self._intervention(edge):
                    pending_seeds.remove(edge)
                    progress = True
            for key in list(pending_nodes):
                if self._solve(*pending_nodes[key]):
                    del pending_nodes[key]
                    progress = True

        for edge in pending_seeds:
            self.skip.setdefault(edge, 'mediating coefficients were not estimated')
        for _, edges in pending_nodes.values():
            for edge in edges:
                self.skip.setdefault(edge, 'witness depends on unestimated coefficients')
        return _Pass(self.est, self.skip, self.diags, self.depth, self.origin)

    # phase 1 ------------------------------------------------------------------

    def _obs(self) -> np.ndarray:
        return self.covs[OBSERVATIONAL]

    def _record(self, edge: Edge, value: float, origin: str, depth: int = 0) -> None:
        self.est[edge] = float(value)
        self.depth[edge] = depth
        self.origin[edge] = origin

    def _phase_one(self) -> t.List[Edge]:
        waiting = []
        for edge in sorted(self.seeds.edges & self.closure.identified_set):
            tag = self.seeds.tag(edge)
            j, i = edge
            if tag is EstimatorTag.PRIOR:
                value = self.seeds.priors.get(edge)
                if value is None:
                    self.skip[edge] = 'prior edge given without a value'
                else:
                    self._record(edge, value, tag.value)
            elif tag is EstimatorTag.INTERVENTION:
                if self.seeds.instruments[edge] not in self.covs:
                    raise MissingRegimeData(self.seeds.instruments[edge])
                waiting.append(edge)
            elif tag is EstimatorTag.IV_RATIO and self.seeds.instruments[edge] != j:
                S = self._obs()
                z = self.seeds.instruments[edge]
                if abs(S[z, j]) < self.cfg.weak_instrument:
                    self.skip[edge] = str(WeakInstrument(S[z, j], self.cfg.weak_instrument))
                else:
                    self._record(edge, S[z, i] / S[z, j], tag.value)
            else:
                S = self._obs()
                if S[j, j] <= 0.0:
                    self.skip[edge] = f'{self.g.label(j)} has zero variance'
                else:
                    self._record(edge, S[j, i] / S[j, j], tag.value)
        return waiting

    def _intervention(self, edge: Edge) -> bool:
        v, c = edge
        C = self.covs[v]
        mediators = sorted((self.g.pa(c) - {v}) & self.g.desc(v))
        if any((p, c) not in self.est for p in mediators):
            return False
        if C[v, v] <= 0.0:
            self.skip[edge] = f'{self.g.label(v)} has zero variance in its intervention regime'
            return True
        value = (C[v, c] - sum(self.est[(p, c)] * C[v, p] for p in mediators)) / C[v, v]
        depth = 1 + max((self.depth[(p, c)] for p in mediators), default=-1)
        self._record(edge, value, EstimatorTag.INTERVENTION.value, depth)
        return True

    # phase 2 ------------------------------------------------------------------

    def _pending_witnesses(self) -> t.Dict[t.Tuple[int, int], t.Tuple[Witness, t.List[Edge]]]:
        groups: t.Dict[t.Tuple[int, int], t.Tuple[Witness, t.List[Edge]]] = {}
        for edge in sorted(self.closure.identified_set - set(self.seeds.edges)):
            witness = self.closure.witness_for(edge)
            if witness is None:
                self.skip[edge] = 'no witness recorded'
                continue
            key = (edge[1], id(witness))
            groups.setdefault(key, (witness, []))[1].append(edge)
        return groups

    def _solve(self, witness: Witness, edges: t.List[Edge]) -> bool:
        i = witness.node
        needed = [(k, i) for k in witness.known_parents]
        for w, adjusted in witness.adjustments.items():
            needed += [(p, w) for p in adjusted]
        blocked = [e for e in needed if e not in self.est]
        if blocked:
            if any(e in self.skip for e in blocked):
                for edge in edges:
                    self.skip[edge] = f'depends on unestimated {self.g.edge_label(blocked[0])}'
                return True
            return False

        S = self._obs()
        sources = list(witness.sources)
        rows = np.array([self._adjusted_row(S, w, witness) for w in sources])
        targets = list(witness.targets)
        known = sorted(witness.known_parents)
        M = rows[:, targets]
        rhs = rows[:, i] - sum((self.est[(k, i)] * rows[:, k] for k in known), np.zeros(len(sources)))
        kappa = float(np.linalg.cond(M))
        step = len(self.diags) + 1
        upstream = tuple(sorted({self.step_of[e] for e in needed if e in self.step_of}))
        depth = 1 + max((self.depth[e] for e in needed), default=0)
        if not np.isfinite(kappa) or kappa > self.cfg.kappa_max:
            err = IllConditionedSystem(i, kappa, self.cfg.kappa_max)
            if self.strict:
                raise err
            logger.warning('%s; leaving %d edge(s) unestimated', err, len(edges))
            self.diags.append(SolveDiagnostic(step, i, tuple(edges), kappa, float('nan'), depth, upstream))
            for edge in edges:
                self.skip[edge] = str(err)
            return True

        solution = np.linalg.solve(M, rhs)
        inv_norm = float(np.linalg.norm(np.linalg.inv(M), 2))
        gamma = inv_norm * max((float(np.linalg.norm(rows[:, k])) for k in known), default=0.0) if known else 0.0
        self.diags.append(SolveDiagnostic(step, i, tuple(edges), kappa, gamma, depth, upstream))
        rule = self.closure.provenance[edges[0]].rule
        for r, value in zip(targets, solution):
            edge = (r, i)
            if edge in edges and edge not in self.est:
                self._record(edge, value, rule.value if rule else 'Witness', depth)
                self.step_of[edge] = step
        return True

    def _adjusted_row(self, S: np.ndarray, w: int, witness: Witness) -> np.ndarray:
        row = S[w].copy()
        for p in witness.adjustments.get(w, ()):
            row -= self.est[(p, w)] * S[p]
        return row


# --- public operations -------------------------------------------------------

def _covs(data: Dataset, n_nodes: int) -> t.Dict[int, np.ndarray]:
    obs = data.rows()
    if obs.shape[0] < n_nodes + 2:
        raise TooFewSamples(obs.shape[0], n_nodes + 2, OBSERVATIONAL)
    covs = {}
    for r in data.regimes():
        rows = data.rows(r)
        if rows.shape[0] < 2:
            raise TooFewSamples(rows.shape[0], 2, r)
        covs[r] = sample_cov(rows)
    return covs


def _close(g: MixedGraph, seeds: SeedSet, closure: t.Optional[ClosureResult]) -> ClosureResult:
    if closure is not None:
        return closure
    return iic_close(ClosureRequest(graph=g, seed=seeds))


def estimate_from_cov(
    g: MixedGraph,
    sigma: np.ndarray,
    closure: t.Optional[ClosureResult] = None,
    seeds: t.Optional[SeedSet] = None,
    regime_covs: t.Optional[t.Mapping[int, np.ndarray]] = None,
    settings: t.Optional[Settings] = None,
    strict: bool = False,
) -> EstimateResult:
    """Point estimates from a supplied covariance (the infinite-data path)."""
    settings = settings or get_settings()
    seeds = seeds if seeds is not None else (closure.seed if closure is not None else SeedSet())
    closure = _close(g, seeds, closure)
    covs = {OBSERVATIONAL: np.asarray(sigma, dtype=float)}
    covs.update(regime_covs or {})
    out = _PlugIn(g, closure, seeds, settings, strict).run(covs)
    return EstimateResult(
        graph=g, estimates=out.estimates, diagnostics=tuple(out.diagnostics),
        unestimated=out.unestimated, depth=out.depth, origin=out.origin,
    )


def _bootstrap_replicate(args: t.Tuple) -> t.Dict[Edge, float]:
    g, closure, seeds, data, stream, settings = args
    replicate = data.resample(np.random.default_rng(stream))
    try:
        covs = {r: sample_cov(replicate.rows(r)) for r in replicate.regimes()}
        return _PlugIn(g, closure, seeds, settings).run(covs).estimates
    except (TooFewSamples, np.linalg.LinAlgError):
        return {}


def iic_estimate(
    g: MixedGraph,
    X: t.Union[np.ndarray, Dataset],
    spec: t.Optional[SeedSpec] = None,
    n_boot: t.Optional[int] = None,
    rng_seed: t.Optional[int] = None,
    closure: t.Optional[ClosureResult] = None,
    settings: t.Optional[Settings] = None,
    jobs: int = 1,
    strict: bool = False,
) -> EstimateResult:
    settings = settings or get_settings()
    data = X if isinstance(X, Dataset) else Dataset(X)
    seeds = closure.seed if closure is not None else resolve_seeds(g, spec or SeedSpec())
    closure = _close(g, seeds, closure)
    if not closure.identified_set:
        logger.warning('nothing is identified in %s; no estimates produced', g)
        return EstimateResult(graph=g, estimates={})

    covs = _covs(data, g.n_nodes)
    point = _PlugIn(g, closure, seeds, settings, strict).run(covs)

    boots = pick(n_boot, settings.estimate.n_boot)
    se: t.Dict[Edge, float] = {}
    ci: t.Dict[Edge, t.Tuple[float, float]] = {}
    if boots > 1 and point.estimates:
        root = pick(rng_seed, settings.experiments.rng_seed)
        tasks = [(g, closure, seeds, data, s, settings) for s in spawn_seeds(root, boots)]
        replicates = parallel_map(_bootstrap_replicate, tasks, jobs)
        z = float(stats.norm.ppf(0.5 + settings.estimate.ci_level / 2.0))
        for edge, value in point.estimates.items():
            draws = np.array([rep[edge] for rep in replicates if edge in rep])
            if draws.size < 2:
                continue
            se[edge] = float(np.std(draws, ddof=1))
            ci[edge] = (value - z * se[edge], value + z * se[edge])
        logger.info('bootstrap finished: %d replicate(s), %d edge(s) with standard errors', boots, len(se))

    return EstimateResult(
        graph=g,
        estimates=point.estimates,
        se=se,
        ci=ci,
        diagnostics=tuple(point.diagnostics),
        unestimated=point.unestimated,
        depth=point.depth,
        origin=point.origin,
        n_boot=boots,
    )


def error_propagation_report(result: EstimateResult, c0: t.Optional[float] = None) -> PropagationReport:
    """Condition numbers along the deepest solve chain and the bound constant C_d."""
    base = pick(c0, get_settings().estimate.c0)
    solved = [d for d in result.diagnostics if np.isfinite(d.gamma)]
    if not solved:
        return PropagationReport(0, (), float(base))
    by_step = {d.step: d for d in solved}
    chain = []
    node = max(solved, key=lambda d: (d.depth, -d.step))
    while node is not None:
        chain.append(node)
        ups = [by_step[s] for s in node.upstream if s in by_step]
        node = max(ups, key=lambda d: (d.depth, -d.step)) if ups else None
    chain.reverse()
    steps = tuple((d.kappa, d.gamma) for d in chain)
    c_d = float(base * np.prod([1.0 + k * gm for k, gm in steps]))
    return PropagationReport(len(chain), steps, c_d)


# --- baselines ---------------------------------------------------------------

def _observational(X: t.Union[np.ndarray, Dataset]) -> np.ndarray:
    return X.rows() if isinstance(X, Dataset) else np.atleast_2d(np.asarray(X, dtype=float))


def ols_baseline(g: MixedGraph, X: t.Union[np.ndarray, Dataset]) -> t.Dict[Edge, float]:
    """Least squares of each node on its parents, ignoring confounding."""
    data = _observational(X)
    centered = data - data.mean(axis=0)
    out: t.Dict[Edge, float] = {}
    for i in g.nodes:
        parents = sorted(g.pa(i))
        if not parents:
            continue
        design = centered[:, parents]
        if np.linalg.matrix_rank(design) < len(parents):
            raise SingularDesign(i)
        coef, *_ = np.linalg.lstsq(design, centered[:, i], rcond=None)
        for p, value in zip(parents, coef):
            out[(p, i)] = float(value)
    return out


def tsls_baseline(
    g: MixedGraph,
    X: t.Union[np.ndarray, Dataset],
    triple: t.Sequence[int],
    validate: bool = True,
    weak_instrument: t.Optional[float] = None,
) -> t.Optional[float]:
    """Just-identified two-stage least squares for T -> Y, i.e. Cov(Z,Y) / Cov(Z,T).

    Returns None when the triple is not a valid instrument for the edge;
    ``validate=False`` computes the ratio anyway.
    """
    z, tt, y = triple
    if validate and not validate_iv_triple(g, z, tt, y).t_to_y_ok:
        return None
    S = sample_cov(_observational(X))
    threshold = pick(weak_instrument, get_settings().estimate.weak_instrument)
    if abs(S[z, tt]) < threshold:
        raise WeakInstrument(S[z, tt], threshold)
    return float(S[z, y] / S[z, tt])


def population_covs(p: ParamRealization, intervened: t.Iterable[int] = ()) -> t.Dict[int, np.ndarray]:
    covs = {OBSERVATIONAL: implied_cov(p)}
    for v in intervened:
        covs[v] = implied_cov(regime_params(p, v))
    return covs
