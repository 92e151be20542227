"""Half-treks, half-trek systems and the max-flow engine behind every criterion.

A half-trek from ``v`` to ``w`` is either a directed path ``v -> ... -> w``
(left side {v}, right side {v, ..., w}) or ``v <-> s -> ... -> w`` (left side
{v}, right side {s, ..., w}). A system has no sided intersection when left
sides are pairwise disjoint and right sides are pairwise disjoint.

The largest such system from a source pool into a target set is a unit
capacity max flow on a network with a left copy and a split right copy of
every node.
"""
from __future__ import annotations

import dataclasses
import enum
import logging
import typing as t

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from .graph import Edge, MixedGraph

logger = logging.getLogger(__name__)

SOURCE = ('s',)
SINK = ('t',)


class HalfTrekKind(str, enum.Enum):
    DIRECTED = 'directed'
    CONFOUNDED = 'confounded'


@dataclasses.dataclass(frozen=True)
class HalfTrek:
    source: int
    target: int
    kind: HalfTrekKind
    path_nodes: t.Tuple[int, ...]

    @property
    def left_side(self) -> t.FrozenSet[int]:
        return frozenset((self.source,))

    @property
    def right_side(self) -> t.FrozenSet[int]:
        if self.kind is HalfTrekKind.CONFOUNDED:
            return frozenset(self.path_nodes[1:])
        return frozenset(self.path_nodes)

    def describe(self, g: t.Optional[MixedGraph] = None) -> str:
        name = (lambda v: g.labels[v]) if g is not None else str
        nodes = [name(v) for v in self.path_nodes]
        if self.kind is HalfTrekKind.CONFOUNDED:
            return f'{nodes[0]} <-> ' + ' -> '.join(nodes[1:])
        return ' -> '.join(nodes)


@dataclasses.dataclass(frozen=True)
class Witness:
    """Certificate that the residual parents of ``node`` are identifiable.

    ``system`` maps each residual parent to its half-trek; ``known_parents``
    is K (empty for the standard criterion); ``adjustments`` lists, per
    source, the solved parents whose contribution is subtracted from that
    source's covariance row.
    """

    node: int
    sources: t.Tuple[int, ...]
    system: t.Mapping[int, HalfTrek]
    known_parents: t.FrozenSet[int] = frozenset()
    adjustments: t.Mapping[int, t.Tuple[int, ...]] = dataclasses.field(default_factory=dict)
    reduced: bool = False

    @property
    def targets(self) -> t.Tuple[int, ...]:
        return tuple(sorted(self.system))

    def source_for(self, target: int) -> int:
        return self.system[target].source


class SystemResult(t.NamedTuple):
    size: int
    sources: t.Tuple[int, ...]
    treks: t.Dict[int, HalfTrek]


def _upstream(g: MixedGraph, targets: t.AbstractSet[int]) -> t.Set[int]:
    """The targets and their ancestors: every node a right side can use."""
    upstream = set(targets)
    for p in targets:
        upstream |= g.anc(p)
    return upstream


def _flow_network(
    g: MixedGraph, targets: t.AbstractSet[int], pool: t.Iterable[int]
) -> nx.DiGraph:
    right = _upstream(g, targets)
    net = nx.DiGraph()
    net.add_node(SOURCE)
    net.add_node(SINK)
    for v in sorted(pool):
        net.add_edge(SOURCE, ('L', v), capacity=1)
        if v in right:
            net.add_edge(('L', v), ('Rin', v), capacity=1)
        for s in sorted(g.sib(v) & right):
            net.add_edge(('L', v), ('Rin', s), capacity=1)
    for v in sorted(right):
        net.add_edge(('Rin', v), ('Rout', v), capacity=1)
    for j, i in g.edges():
        if i in right:
            net.add_edge(('Rout', j), ('Rin', i), capacity=1)
    for p in sorted(targets):
        net.add_edge(('Rout', p), SINK, capacity=1)
    return net


def _reaching(g: MixedGraph, targets: t.AbstractSet[int]) -> t.Set[int]:
    """Nodes with at least one half-trek into ``targets``."""
    upstream = _upstream(g, targets)
    reach = set(upstream)
    for v in g.nodes:
        if g.sib(v) & upstream:
            reach.add(v)
    return reach


def _flow_value(g: MixedGraph, targets: t.AbstractSet[int], pool: t.Iterable[int]) -> int:
    pool = list(pool)
    if not pool or not targets:
        return 0
    net = _flow_network(g, targets, pool)
    return int(nx.maximum_flow_value(net, SOURCE, SINK, flow_func=edmonds_karp))


def _decompose(flow: t.Dict[t.Any, t.Dict[t.Any, int]]) -> t.Dict[int, HalfTrek]:
    treks: t.Dict[int, HalfTrek] = {}
    for left, units in sorted(flow[SOURCE].items()):
        if units <= 0:
            continue
        source = left[1]
        step = next(node for node, f in sorted(flow[left].items()) if f > 0)
        kind = HalfTrekKind.DIRECTED if step[1] == source else HalfTrekKind.CONFOUNDED
        path = [source] if kind is HalfTrekKind.DIRECTED else [source, step[1]]
        node = step
        while True:
            out = ('Rout', node[1])
            nxt = next(n for n, f in sorted(flow[out].items()) if f > 0)
            if nxt == SINK:
                break
            path.append(nxt[1])
            node = nxt
        target = path[-1]
        treks[target] = HalfTrek(source=source, target=target, kind=kind, path_nodes=tuple(path))
    return treks


def max_halftrek_system(
    g: MixedGraph,
    targets: t.Iterable[int],
    source_pool: t.Iterable[int],
    forbidden_left: t.Iterable[int] = (),
    extract: bool = True,
    required: int = 0,
) -> SystemResult:
    """Largest half-trek system with no sided intersection from the pool into the targets.

    Sources in ``forbidden_left`` are never used. With ``extract`` the
    returned system uses the lexicographically smallest source set among
    all maximum systems (greedy over the linking matroid). Nothing is
    extracted when the size falls short of ``required``.
    """
    targets = frozenset(targets)
    pool = sorted(set(source_pool) - set(forbidden_left))
    relevant = _reaching(g, targets) if targets else set()
    pool = [v for v in pool if v in relevant]
    size = _flow_value(g, targets, pool)
    if not extract or size == 0 or size < required:
        return SystemResult(size, (), {})

    chosen: t.List[int] = []
    for v in pool:
        if len(chosen) == size:
            break
        if _flow_value(g, targets, chosen + [v]) == len(chosen) + 1:
            chosen.append(v)
    net = _flow_network(g, targets, chosen)
    _, flow = nx.maximum_flow(net, SOURCE, SINK, flow_func=edmonds_karp)
    treks = _decompose(flow)
    logger.debug('system of size %d into %s from %s', size, sorted(targets), chosen)
    return SystemResult(size, tuple(chosen), treks)


def system_size(g: MixedGraph, targets: t.Iterable[int], source_pool: t.Iterable[int]) -> int:
    return max_halftrek_system(g, targets, source_pool, extract=False).size


def trek_is_valid(g: MixedGraph, trek: HalfTrek) -> bool:
    path = trek.path_nodes
    if not path or path[0] != trek.source or path[-1] != trek.target:
        return False
    if trek.kind is HalfTrekKind.CONFOUNDED:
        if len(path) < 2 or not g.has_bidirected(path[0], path[1]):
            return False
        directed_part = path[1:]
    else:
        directed_part = path
    if len(set(directed_part)) != len(directed_part):
        return False
    return all(g.has_edge(a, b) for a, b in zip(directed_part, directed_part[1:]))


def verify_witness(
    g: MixedGraph, witness: Witness, solved: t.Optional[t.AbstractSet[Edge]] = None
) -> t.List[str]:
    """Re-walk a witness against the graph; returns the list of problems found."""
    problems: t.List[str] = []
    i = witness.node
    residual = set(g.pa(i)) - set(witness.known_parents)
    if not set(witness.known_parents) <= g.pa(i):
        problems.append('known parents are not all parents of the node')
    if set(witness.system) != residual:
        problems.append(f'system targets {sorted(witness.system)} differ from residual parents {sorted(residual)}')
    if len(witness.sources) != len(witness.system):
        problems.append('number of sources differs from number of targets')
    if sorted(witness.sources) != sorted(tr.source for tr in witness.system.values()):
        problems.append('declared sources do not match the half-trek sources')

    forbidden = {i} | set(g.sib(i))
    lefts: t.Set[int] = set()
    rights: t.Set[int] = set()
    for target, trek in sorted(witness.system.items()):
        if trek.target != target:
            problems.append(f'half-trek assigned to {target} ends at {trek.target}')
        if not trek_is_valid(g, trek):
            problems.append(f'{trek.describe(g)} is not a half-trek of the graph')
        if trek.left_side & forbidden:
            problems.append(f'left side of {trek.describe(g)} meets the node or its siblings')
        if trek.left_side & lefts:
            problems.append('left sides intersect')
        if trek.right_side & rights:
            problems.append('right sides intersect')
        lefts |= trek.left_side
        rights |= trek.right_side

    blocked = g.htr(i)
    for w in witness.sources:
        adjusted = set(witness.adjustments.get(w, ()))
        if not adjusted <= g.pa(w):
            problems.append(f'adjustments of source {w} are not parents of it')
        if solved is not None and any((p, w) not in solved for p in adjusted):
            problems.append(f'source {w} subtracts an unsolved edge')
        for p in g.pa(w) - adjusted:
            if p in blocked:
                problems.append(f'source {w} has unsolved parent {p} reachable by a half-trek from {i}')
    if witness.reduced and set(witness.sources) & (set(g.desc(i)) | {i}):
        problems.append('reduced witness uses a descendant of the node as a source')
    return problems
