"""Immutable mixed graphs (directed acyclic part plus bidirected confounding).

Nodes are dense integers ``0..n-1``; labels are cosmetic. All structural
sets are computed once at construction, so a ``MixedGraph`` can be shared
freely across threads and processes.
"""
from __future__ import annotations

import dataclasses
import enum
import logging
import typing as t

import networkx as nx

from .exceptions import CycleDetected, IndexOutOfRange, SelfLoop, UnknownNodeLabel

logger = logging.getLogger(__name__)

Edge = t.Tuple[int, int]


class EdgeStatus(str, enum.Enum):
    IDENTIFIED = 'Identified'
    NON_IDENTIFIABLE = 'NonIdentifiable'
    INCONCLUSIVE = 'Inconclusive'


class Neighborhood(t.NamedTuple):
    pa: t.FrozenSet[int]
    ch: t.FrozenSet[int]
    sib: t.FrozenSet[int]
    desc: t.FrozenSet[int]
    anc: t.FrozenSet[int]


def _bi_key(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclasses.dataclass(frozen=True, eq=False)
class MixedGraph:
    n_nodes: int
    directed: t.FrozenSet[Edge]
    bidirected: t.FrozenSet[Edge]
    labels: t.Tuple[str, ...]
    _pa: t.Tuple[t.FrozenSet[int], ...] = dataclasses.field(repr=False)
    _ch: t.Tuple[t.FrozenSet[int], ...] = dataclasses.field(repr=False)
    _sib: t.Tuple[t.FrozenSet[int], ...] = dataclasses.field(repr=False)
    _desc: t.Tuple[t.FrozenSet[int], ...] = dataclasses.field(repr=False)
    _anc: t.Tuple[t.FrozenSet[int], ...] = dataclasses.field(repr=False)
    _order: t.Tuple[int, ...] = dataclasses.field(repr=False)

    # structure --------------------------------------------------------------

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    def _check(self, i: int) -> None:
        if not 0 <= i < self.n_nodes:
            raise IndexOutOfRange(i, self.n_nodes)

    def pa(self, i: int) -> t.FrozenSet[int]:
        self._check(i)
        return self._pa[i]

    def ch(self, i: int) -> t.FrozenSet[int]:
        self._check(i)
        return self._ch[i]

    def sib(self, i: int) -> t.FrozenSet[int]:
        self._check(i)
        return self._sib[i]

    def desc(self, i: int) -> t.FrozenSet[int]:
        self._check(i)
        return self._desc[i]

    def anc(self, i: int) -> t.FrozenSet[int]:
        self._check(i)
        return self._anc[i]

    def htr(self, i: int) -> t.FrozenSet[int]:
        """Nodes a half-trek from ``i`` can reach, plus ``i`` itself."""
        self._check(i)
        reach = {i} | self._sib[i] | self._desc[i]
        for s in self._sib[i]:
            reach |= self._desc[s]
        return frozenset(reach)

    def edges(self) -> t.List[Edge]:
        return sorted(self.directed)

    def bidirected_edges(self) -> t.List[Edge]:
        return sorted(self.bidirected)

    def has_edge(self, j: int, i: int) -> bool:
        return (j, i) in self.directed

    def has_bidirected(self, a: int, b: int) -> bool:
        return _bi_key(a, b) in self.bidirected

    def topological_order(self) -> t.List[int]:
        return list(self._order)

    # labels -----------------------------------------------------------------

    def label(self, i: int) -> str:
        self._check(i)
        return self.labels[i]

    def index_of(self, name: t.Union[str, int]) -> int:
        if isinstance(name, int):
            self._check(name)
            return name
        try:
            return self.labels.index(name)
        except ValueError:
            if name.isdigit() and int(name) < self.n_nodes:
                return int(name)
            raise UnknownNodeLabel(name) from None

    def edge_label(self, edge: Edge) -> str:
        return f'{self.labels[edge[0]]}->{self.labels[edge[1]]}'

    def has_custom_labels(self) -> bool:
        return any(lbl != str(i) for i, lbl in enumerate(self.labels))

    # derived graphs -----------------------------------------------------------

    def induced_subgraph(self, keep: t.Iterable[int]) -> t.Tuple['MixedGraph', t.List[int]]:
        """Subgraph over ``keep`` relabelled densely; returns it with the old ids."""
        old = sorted(set(keep))
        for v in old:
            self._check(v)
        new_id = {v: k for k, v in enumerate(old)}
        directed = [(new_id[j], new_id[i]) for j, i in self.directed if j in new_id and i in new_id]
        bidirected = [(new_id[a], new_id[b]) for a, b in self.bidirected if a in new_id and b in new_id]
        labels = {new_id[v]: self.labels[v] for v in old}
        return build_graph(len(old), directed, bidirected, labels), old

    def ancestral_subgraph(self, i: int) -> t.Tuple['MixedGraph', t.List[int]]:
        return self.induced_subgraph(self.anc(i) | {i})

    def with_edges(
        self,
        add_directed: t.Iterable[Edge] = (),
        remove_directed: t.Iterable[Edge] = (),
        add_bidirected: t.Iterable[Edge] = (),
        remove_bidirected: t.Iterable[Edge] = (),
    ) -> 'MixedGraph':
        directed = (set(self.directed) - set(remove_directed)) | set(add_directed)
        dropped = {_bi_key(a, b) for a, b in remove_bidirected}
        bidirected = (set(self.bidirected) - dropped) | {_bi_key(a, b) for a, b in add_bidirected}
        return build_graph(self.n_nodes, sorted(directed), sorted(bidirected), dict(enumerate(self.labels)))

    def to_networkx(self) -> nx.DiGraph:
        dag = nx.DiGraph()
        dag.add_nodes_from(self.nodes)
        dag.add_edges_from(sorted(self.directed))
        return dag

    # value semantics ----------------------------------------------------------

    def key(self) -> t.Tuple[int, t.Tuple[Edge, ...], t.Tuple[Edge, ...]]:
        return (self.n_nodes, tuple(sorted(self.directed)), tuple(sorted(self.bidirected)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        d = ', '.join(self.edge_label(e) for e in self.edges())
        b = ', '.join(f'{self.labels[a]}<->{self.labels[c]}' for a, c in self.bidirected_edges())
        return f'MixedGraph(n={self.n_nodes}; {d or "no directed edges"}; {b or "no bidirected edges"})'


def build_graph(
    n: int,
    directed: t.Iterable[t.Sequence[int]] = (),
    bidirected: t.Iterable[t.Sequence[int]] = (),
    labels: t.Optional[t.Mapping[int, str]] = None,
) -> MixedGraph:
    """Validate edge lists and return an immutable ``MixedGraph``.

    Raises ``IndexOutOfRange``, ``SelfLoop`` or ``CycleDetected``.
    """
    if n < 0:
        raise IndexOutOfRange(n, 0)

    def check(v: int) -> int:
        v = int(v)
        if not 0 <= v < n:
            raise IndexOutOfRange(v, n)
        return v

    d_set: t.Set[Edge] = set()
    for j, i in directed:
        j, i = check(j), check(i)
        if j == i:
            raise SelfLoop(i, 'directed')
        d_set.add((j, i))
    b_set: t.Set[Edge] = set()
    for a, b in bidirected:
        a, b = check(a), check(b)
        if a == b:
            raise SelfLoop(a, 'bidirected')
        b_set.add(_bi_key(a, b))

    dag = nx.DiGraph()
    dag.add_nodes_from(range(n))
    dag.add_edges_from(sorted(d_set))
    if not nx.is_directed_acyclic_graph(dag):
        raise CycleDetected(nx.find_cycle(dag))

    pa = [set() for _ in range(n)]
    ch = [set() for _ in range(n)]
    sib = [set() for _ in range(n)]
    for j, i in d_set:
        pa[i].add(j)
        ch[j].add(i)
    for a, b in b_set:
        sib[a].add(b)
        sib[b].add(a)

    order = list(nx.lexicographical_topological_sort(dag))
    desc: t.List[t.FrozenSet[int]] = [frozenset()] * n
    for v in reversed(order):
        reach: t.Set[int] = set()
        for c in ch[v]:
            reach.add(c)
            reach |= desc[c]
        desc[v] = frozenset(reach)
    anc: t.List[t.Set[int]] = [set() for _ in range(n)]
    for v in range(n):
        for d in desc[v]:
            anc[d].add(v)

    names = tuple(str((labels or {}).get(v, v)) for v in range(n))
    return MixedGraph(
        n_nodes=n,
        directed=frozenset(d_set),
        bidirected=frozenset(b_set),
        labels=names,
        _pa=tuple(frozenset(s) for s in pa),
        _ch=tuple(frozenset(s) for s in ch),
        _sib=tuple(frozenset(s) for s in sib),
        _desc=tuple(desc),
        _anc=tuple(frozenset(s) for s in anc),
        _order=tuple(order),
    )


def neighborhood(g: MixedGraph, i: int) -> Neighborhood:
    return Neighborhood(pa=g.pa(i), ch=g.ch(i), sib=g.sib(i), desc=g.desc(i), anc=g.anc(i))


def topological_order(g: MixedGraph) -> t.List[int]:
    """Kahn order with the smallest available index first."""
    return g.topological_order()
