"""Seed functions: side information turned into initially identified edges.

A ``SeedSpec`` is declarative (IV triples, intervened nodes, the structural
non-Gaussianity rule, prior edges, exogenous first stages). ``resolve_seeds``
checks every item against the graph and returns a ``SeedSet``: the edges it
can vouch for, each tagged with the estimator that recovers it from data.
Invalid IV triples contribute nothing and are kept as verdicts for reporting.
"""
from __future__ import annotations

import dataclasses
import enum
import itertools
import logging
import typing as t

from .config import get_settings, pick
from .exceptions import GraphTooLarge, InvalidTriple, PriorEdgeNotInGraph
from .graph import Edge, MixedGraph

logger = logging.getLogger(__name__)

Triple = t.Tuple[int, int, int]


class EstimatorTag(str, enum.Enum):
    IV_RATIO = 'IvRatio'
    EXOGENOUS = 'Exogenous'
    INTERVENTION = 'InterventionRegression'
    NG_BIVARIATE = 'NgBivariate'
    PRIOR = 'PriorValue'


# when one edge is vouched for twice, the first tag in this order wins
_PRECEDENCE = (
    EstimatorTag.PRIOR,
    EstimatorTag.IV_RATIO,
    EstimatorTag.EXOGENOUS,
    EstimatorTag.NG_BIVARIATE,
    EstimatorTag.INTERVENTION,
)


class IvVerdict(t.NamedTuple):
    triple: Triple
    z_to_t_ok: bool
    t_to_y_ok: bool
    reason: str

    @property
    def edges(self) -> t.List[Edge]:
        z, tt, y = self.triple
        out = [(z, tt)] if self.z_to_t_ok else []
        if self.t_to_y_ok:
            out.append((tt, y))
        return out


@dataclasses.dataclass(frozen=True)
class SeedSpec:
    iv_triples: t.Tuple[Triple, ...] = ()
    intervened: t.FrozenSet[int] = frozenset()
    use_ng_rule: bool = False
    prior_edges: t.Tuple[t.Tuple[int, int, t.Optional[float]], ...] = ()
    exogenous: bool = False

    @classmethod
    def build(
        cls,
        iv: t.Iterable[t.Sequence[int]] = (),
        intervened: t.Iterable[int] = (),
        use_ng_rule: bool = False,
        prior: t.Iterable[t.Sequence] = (),
        exogenous: bool = False,
    ) -> 'SeedSpec':
        priors = []
        for item in prior:
            j, i = int(item[0]), int(item[1])
            value = item[2] if len(item) > 2 else None
            priors.append((j, i, None if value is None else float(value)))
        return cls(
            iv_triples=tuple(tuple(int(v) for v in tr) for tr in iv),
            intervened=frozenset(int(v) for v in intervened),
            use_ng_rule=use_ng_rule,
            prior_edges=tuple(priors),
            exogenous=exogenous,
        )

    def union(self, other: 'SeedSpec') -> 'SeedSpec':
        triples = tuple(dict.fromkeys(self.iv_triples + other.iv_triples))
        known = {(j, i) for j, i, _ in self.prior_edges}
        priors = self.prior_edges + tuple(p for p in other.prior_edges if (p[0], p[1]) not in known)
        return SeedSpec(
            iv_triples=triples,
            intervened=self.intervened | other.intervened,
            use_ng_rule=self.use_ng_rule or other.use_ng_rule,
            prior_edges=priors,
            exogenous=self.exogenous or other.exogenous,
        )

    def is_empty(self) -> bool:
        return not (self.iv_triples or self.intervened or self.use_ng_rule or self.prior_edges or self.exogenous)


@dataclasses.dataclass(frozen=True)
class SeedSet:
    """Resolved seed edges.

    ``instruments`` maps IV and exogenous edges to the instrument node and
    intervention edges to the intervened node; ``priors`` holds the supplied
    value of prior edges (None when only the fact is known).
    """

    edges: t.FrozenSet[Edge] = frozenset()
    tags: t.Mapping[Edge, EstimatorTag] = dataclasses.field(default_factory=dict)
    instruments: t.Mapping[Edge, int] = dataclasses.field(default_factory=dict)
    priors: t.Mapping[Edge, t.Optional[float]] = dataclasses.field(default_factory=dict)
    verdicts: t.Tuple[IvVerdict, ...] = ()

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, edge: object) -> bool:
        return edge in self.edges

    def __iter__(self) -> t.Iterator[Edge]:
        return iter(sorted(self.edges))

    def tag(self, edge: Edge) -> EstimatorTag:
        return self.tags[edge]

    def by_tag(self, tag: EstimatorTag) -> t.List[Edge]:
        return sorted(e for e, tg in self.tags.items() if tg is tag)

    @classmethod
    def empty(cls) -> 'SeedSet':
        return cls()


def _first_stage_problem(g: MixedGraph, z: int, tt: int) -> t.Optional[str]:
    """Reason why Cov(Z,T)/Var(Z) is not the coefficient of Z -> T, or None."""
    if g.pa(z):
        return f'{g.label(z)} has parents {sorted(g.label(p) for p in g.pa(z))}'
    if g.sib(z):
        return f'{g.label(z)} is confounded with {sorted(g.label(s) for s in g.sib(z))}'
    if not g.has_edge(z, tt):
        return f'no edge {g.label(z)}->{g.label(tt)}'
    mediated = sorted((g.pa(tt) - {z}) & g.desc(z))
    if mediated:
        return f'{g.label(z)} also reaches {g.label(tt)} through {g.label(mediated[0])}'
    return None


def validate_iv_triple(g: MixedGraph, z: int, tt: int, y: int) -> IvVerdict:
    triple = (z, tt, y)
    if len(set(triple)) != 3:
        return IvVerdict(triple, False, False, 'Z, T and Y must be distinct')
    for v in triple:
        g.pa(v)

    problem = _first_stage_problem(g, z, tt)
    if problem is None and g.has_edge(z, y):
        problem = f'direct edge {g.label(z)}->{g.label(y)} violates exclusion'
    if problem is not None:
        return IvVerdict(triple, False, False, problem)

    if not g.has_edge(tt, y):
        return IvVerdict(triple, True, False, f'no edge {g.label(tt)}->{g.label(y)}')
    mediators = sorted((g.pa(y) - {tt}) & g.desc(z))
    if mediators:
        return IvVerdict(
            triple, True, False,
            f'mediator path through {g.label(mediators[0])} into {g.label(y)}',
        )
    return IvVerdict(triple, True, True, 'ok')


def giv_augment(g: MixedGraph, triple: t.Sequence[int]) -> MixedGraph:
    """Drop every edge at Z except Z -> T."""
    z, tt, y = triple
    verdict = validate_iv_triple(g, z, tt, y)
    if not verdict.z_to_t_ok:
        raise InvalidTriple(tuple(triple), verdict.reason)
    drop = [(z, c) for c in g.ch(z) if c != tt]
    drop_bi = [(z, s) for s in g.sib(z)]
    if not drop and not drop_bi:
        return g
    return g.with_edges(remove_directed=drop, remove_bidirected=drop_bi)


def resolve_seeds(g: MixedGraph, spec: t.Optional[SeedSpec] = None) -> SeedSet:
    spec = spec or SeedSpec()
    claims: t.Dict[EstimatorTag, t.Dict[Edge, t.Optional[int]]] = {tag: {} for tag in _PRECEDENCE}
    priors: t.Dict[Edge, t.Optional[float]] = {}
    verdicts: t.List[IvVerdict] = []

    for triple in spec.iv_triples:
        verdict = validate_iv_triple(g, *triple)
        verdicts.append(verdict)
        if not verdict.z_to_t_ok:
            logger.warning('IV triple %s rejected: %s', tuple(g.label(v) for v in triple), verdict.reason)
        elif not verdict.t_to_y_ok:
            logger.info('IV triple %s seeds the first stage only: %s', tuple(g.label(v) for v in triple), verdict.reason)
        for edge in verdict.edges:
            claims[EstimatorTag.IV_RATIO].setdefault(edge, triple[0])

    if spec.exogenous:
        for z in g.nodes:
            for c in sorted(g.ch(z)):
                if _first_stage_problem(g, z, c) is None:
                    claims[EstimatorTag.EXOGENOUS].setdefault((z, c), z)

    for v in sorted(spec.intervened):
        for c in sorted(g.ch(v)):
            claims[EstimatorTag.INTERVENTION].setdefault((v, c), v)

    if spec.use_ng_rule:
        for i in g.nodes:
            if len(g.pa(i)) == 1 and not g.sib(i):
                (j,) = g.pa(i)
                claims[EstimatorTag.NG_BIVARIATE].setdefault((j, i), None)

    for j, i, value in spec.prior_edges:
        if not g.has_edge(j, i):
            raise PriorEdgeNotInGraph((j, i))
        claims[EstimatorTag.PRIOR][(j, i)] = None
        priors[(j, i)] = value

    tags: t.Dict[Edge, EstimatorTag] = {}
    instruments: t.Dict[Edge, int] = {}
    for tag in _PRECEDENCE:
        for edge, anchor in sorted(claims[tag].items()):
            if edge in tags:
                continue
            tags[edge] = tag
            if anchor is not None:
                instruments[edge] = anchor

    logger.debug('resolved %d seed edge(s) from %d IV triple(s)', len(tags), len(spec.iv_triples))
    return SeedSet(
        edges=frozenset(tags),
        tags=tags,
        instruments=instruments,
        priors=priors,
        verdicts=tuple(verdicts),
    )


def discover_iv_triples(g: MixedGraph, max_nodes: t.Optional[int] = None) -> t.List[Triple]:
    """Every (Z, T, Y) whose first stage validates; brute force over ordered triples."""
    limit = pick(max_nodes, get_settings().cli.discover_max_nodes)
    if g.n_nodes > limit:
        raise GraphTooLarge(g.n_nodes, limit)
    found = [
        (z, tt, y)
        for z, tt, y in itertools.permutations(g.nodes, 3)
        if validate_iv_triple(g, z, tt, y).z_to_t_ok
    ]
    logger.debug('found %d IV triple(s) in %s', len(found), g)
    return found
