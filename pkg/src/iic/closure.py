"""Iterative identification closure.

Start from the seed edges plus everything the recursive half-trek criterion
identifies, then sweep the nodes: the identified parents of a node form the
known set K and the reduced criterion is tried on the residual parents. A
success identifies the whole residual set at once and is visible to every
later node of the same sweep. Sweeps stop at the fixed point; unresolved
target edges are then labelled non-identifiable or inconclusive.

All rules only ever add edges and each is monotone in the identified set, so
the fixed point does not depend on the order nodes are visited in.
"""
from __future__ import annotations

import collections
import dataclasses
import enum
import logging
import typing as t

from .config import get_settings, pick
from .exceptions import EdgeNotInGraph, EmptySeed
from .graph import Edge, EdgeStatus, MixedGraph
from .halftrek import Witness
from .htc import edge_not_identifiable, htc_check, reduced_htc_check, unreachable_sibling_parent
from .seeds import EstimatorTag, SeedSet

logger = logging.getLogger(__name__)


class Rule(str, enum.Enum):
    SEED = 'Seed'
    HTC = 'HTC'
    REDUCED_HTC = 'ReducedHTC'
    INFINITE_TO_ONE = 'InfiniteToOne'
    SINGLE_UNKNOWN = 'SingleUnknownNonId'


class Provenance(t.NamedTuple):
    rule: t.Optional[Rule]
    iteration: int
    witness: t.Optional[Witness] = None
    tag: t.Optional[EstimatorTag] = None


class GapRecord(t.NamedTuple):
    edge: Edge
    r_size: int
    r_sib_overlap: int


@dataclasses.dataclass(frozen=True)
class ClosureRequest:
    graph: MixedGraph
    seed: SeedSet = dataclasses.field(default_factory=SeedSet)
    targets: t.Optional[t.FrozenSet[Edge]] = None
    order: t.Optional[t.Sequence[int]] = None
    single_unknown: t.Optional[bool] = None

    def __post_init__(self) -> None:
        for edge in sorted(self.targets or ()):
            if not self.graph.has_edge(*edge):
                raise EdgeNotInGraph(edge)
        if self.order is not None and sorted(self.order) != list(self.graph.nodes):
            raise ValueError('order must be a permutation of the graph nodes')

    def target_edges(self) -> t.List[Edge]:
        return sorted(self.targets) if self.targets is not None else self.graph.edges()


@dataclasses.dataclass(frozen=True)
class ClosureResult:
    graph: MixedGraph
    status: t.Mapping[Edge, EdgeStatus]
    provenance: t.Mapping[Edge, Provenance]
    iterations: int
    identified_set: t.FrozenSet[Edge]
    seed: SeedSet = dataclasses.field(default_factory=SeedSet)

    def identified(self) -> t.List[Edge]:
        return self.by_status(EdgeStatus.IDENTIFIED)

    def by_status(self, status: EdgeStatus) -> t.List[Edge]:
        return sorted(e for e, s in self.status.items() if s is status)

    def summary(self) -> t.Dict[str, int]:
        counts = collections.Counter(s.value for s in self.status.values())
        out = {s.value: counts.get(s.value, 0) for s in EdgeStatus}
        out['total'] = len(self.status)
        return out

    def residual(self, i: int) -> t.FrozenSet[int]:
        """Parents of ``i`` whose edge is not identified at the fixed point."""
        return frozenset(p for p in self.graph.pa(i) if (p, i) not in self.identified_set)

    def witness_for(self, edge: Edge) -> t.Optional[Witness]:
        prov = self.provenance.get(edge)
        return prov.witness if prov else None

    def rows(self) -> t.List[t.Dict[str, t.Any]]:
        g = self.graph
        rows = []
        for edge in sorted(self.status):
            prov = self.provenance[edge]
            sources = ''
            if prov.witness is not None:
                sources = ' '.join(g.label(w) for w in prov.witness.sources)
            rows.append({
                'edge': g.edge_label(edge),
                'status': self.status[edge].value,
                'rule': prov.rule.value if prov.rule else '',
                'iteration': prov.iteration,
                'witness_sources': sources,
            })
        return rows


class _Closure:
    def __init__(self, req: ClosureRequest):
        self.g = req.graph
        self.seed = req.seed
        self.order = list(req.order) if req.order is not None else list(self.g.nodes)
        self.single_unknown = pick(req.single_unknown, get_settings().closure.single_unknown)
        self.targets = req.target_edges()
        self.solved: t.Set[Edge] = set()
        self.provenance: t.Dict[Edge, Provenance] = {}

    def _residual(self, i: int) -> t.Set[int]:
        return {p for p in self.g.pa(i) if (p, i) not in self.solved}

    def _mark(self, i: int, parents: t.Iterable[int], prov: Provenance) -> None:
        for p in sorted(parents):
            self.solved.add((p, i))
            self.provenance[(p, i)] = prov

    def _initialize(self) -> None:
        for edge in sorted(self.seed.edges):
            if not self.g.has_edge(*edge):
                raise EdgeNotInGraph(edge)
            self.solved.add(edge)
            self.provenance[edge] = Provenance(Rule.SEED, 0, None, self.seed.tag(edge))
        changed = True
        while changed:
            changed = False
            for i in self.order:
                residual = self._residual(i)
                if not residual:
                    continue
                witness = htc_check(self.g, i, frozenset(self.solved))
                if witness is not None:
                    self._mark(i, residual, Provenance(Rule.HTC, 0, witness))
                    changed = True

    def _sweep(self, iteration: int) -> bool:
        changed = False
        for i in self.order:
            residual = self._residual(i)
            if not residual:
                continue
            solved = frozenset(self.solved)
            known = self.g.pa(i) - residual
            witness = None
            if known:
                witness = reduced_htc_check(self.g, i, known, solved)
            if witness is None:
                witness = htc_check(self.g, i, solved)
            if witness is None:
                continue
            rule = Rule.REDUCED_HTC if witness.known_parents else Rule.HTC
            self._mark(i, residual, Provenance(rule, iteration, witness))
            logger.debug(
                'sweep %d: %s identifies %s', iteration, rule.value,
                ', '.join(self.g.edge_label((p, i)) for p in sorted(residual)),
            )
            changed = True
        return changed

    def _label(self, edge: Edge) -> t.Tuple[EdgeStatus, Provenance]:
        if edge in self.solved:
            return EdgeStatus.IDENTIFIED, self.provenance[edge]
        j, i = edge
        residual = self._residual(i)
        if self.single_unknown and len(residual) == 1 and unreachable_sibling_parent(self.g, j, i):
            return EdgeStatus.NON_IDENTIFIABLE, Provenance(Rule.SINGLE_UNKNOWN, 0)
        if edge_not_identifiable(self.g, j, i, known=self.g.pa(i) - residual):
            return EdgeStatus.NON_IDENTIFIABLE, Provenance(Rule.INFINITE_TO_ONE, 0)
        return EdgeStatus.INCONCLUSIVE, Provenance(None, 0)

    def run(self) -> ClosureResult:
        self._initialize()
        iterations = 0
        while len(self.solved) < len(self.g.directed):
            iterations += 1
            if not self._sweep(iterations):
                break

        status: t.Dict[Edge, EdgeStatus] = {}
        provenance: t.Dict[Edge, Provenance] = {}
        for edge in self.targets:
            status[edge], provenance[edge] = self._label(edge)
        result = ClosureResult(
            graph=self.g,
            status=status,
            provenance=provenance,
            iterations=iterations,
            identified_set=frozenset(self.solved),
            seed=self.seed,
        )
        logger.info('closure reached its fixed point after %d sweep(s): %s', iterations, result.summary())
        return result


def iic_close(req: ClosureRequest) -> ClosureResult:
    return _Closure(req).run()


def iic_close_unseeded(g: MixedGraph, single_unknown: t.Optional[bool] = None) -> ClosureResult:
    return iic_close(ClosureRequest(graph=g, single_unknown=single_unknown))


def gap_profile(g: MixedGraph, result: ClosureResult) -> t.List[GapRecord]:
    """|R| and |R & sib(i)| for every inconclusive edge j -> i."""
    records = []
    for j, i in result.by_status(EdgeStatus.INCONCLUSIVE):
        residual = result.residual(i)
        records.append(GapRecord((j, i), len(residual), len(residual & g.sib(i))))
    return records


def propagation_gain(result: ClosureResult, seed: SeedSet, htc_only: ClosureResult) -> float:
    """Edges identified beyond the unseeded closure, per seed edge."""
    if not seed.edges:
        raise EmptySeed()
    gained = result.identified_set - htc_only.identified_set
    return len(gained) / len(seed.edges)
