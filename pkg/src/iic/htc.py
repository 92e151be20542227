"""Half-trek criteria for a single node.

``solved`` is the set of directed edges already known to be identifiable.
A node ``w`` may serve as a source for node ``i`` when it is neither ``i``
nor a sibling of ``i`` and every parent ``p`` of ``w`` whose edge ``p -> w``
is unsolved lies outside the half-trek reach of ``i``. Solved parents are
subtracted from the source's covariance row when the equations are formed.
"""
from __future__ import annotations

import logging
import typing as t

from .exceptions import KnownNotSubsetOfParents
from .graph import Edge, MixedGraph
from .halftrek import Witness, max_halftrek_system, system_size

logger = logging.getLogger(__name__)


def admissible_sources(
    g: MixedGraph, i: int, solved: t.Optional[t.AbstractSet[Edge]] = None
) -> t.List[int]:
    solved = solved or frozenset()
    blocked = g.htr(i)
    excluded = {i} | set(g.sib(i))
    pool = []
    for w in g.nodes:
        if w in excluded:
            continue
        if all(p not in blocked or (p, w) in solved for p in g.pa(w)):
            pool.append(w)
    return pool


def _adjustments(
    g: MixedGraph, sources: t.Iterable[int], solved: t.AbstractSet[Edge]
) -> t.Dict[int, t.Tuple[int, ...]]:
    return {w: tuple(sorted(p for p in g.pa(w) if (p, w) in solved)) for w in sources}


def _solve_node(
    g: MixedGraph,
    i: int,
    known: t.AbstractSet[int],
    solved: t.AbstractSet[Edge],
    pool: t.Iterable[int],
    reduced: bool,
) -> t.Optional[Witness]:
    residual = set(g.pa(i)) - set(known)
    if not residual:
        return Witness(node=i, sources=(), system={}, known_parents=frozenset(known), reduced=reduced)
    result = max_halftrek_system(g, residual, pool, forbidden_left=g.sib(i), required=len(residual))
    if result.size < len(residual):
        return None
    return Witness(
        node=i,
        sources=result.sources,
        system=result.treks,
        known_parents=frozenset(known),
        adjustments=_adjustments(g, result.sources, solved),
        reduced=reduced,
    )


def htc_check(
    g: MixedGraph, i: int, solved: t.Optional[t.AbstractSet[Edge]] = None
) -> t.Optional[Witness]:
    """Standard half-trek criterion for all parents of ``i``.

    Returns the witness, the empty witness when ``i`` has no parents, or None.
    """
    solved = solved or frozenset()
    witness = _solve_node(g, i, frozenset(), solved, admissible_sources(g, i, solved), reduced=False)
    logger.debug('HTC at %s: %s', g.label(i), 'holds' if witness else 'fails')
    return witness


def reduced_htc_check(
    g: MixedGraph,
    i: int,
    known: t.AbstractSet[int],
    solved: t.Optional[t.AbstractSet[Edge]] = None,
    pool: t.Optional[t.Iterable[int]] = None,
) -> t.Optional[Witness]:
    """Half-trek criterion for the residual parents ``pa(i) - known``.

    Sources come from the non-descendants of ``i`` unless ``pool`` widens
    or narrows the candidates; admissibility always applies.
    """
    known = frozenset(known)
    extra = known - g.pa(i)
    if extra:
        raise KnownNotSubsetOfParents(i, extra)
    solved = solved or frozenset()
    admissible = set(admissible_sources(g, i, solved))
    if pool is None:
        candidates = set(g.nodes) - set(g.desc(i)) - {i}
    else:
        candidates = set(pool) - {i}
    witness = _solve_node(g, i, known, solved, sorted(admissible & candidates), reduced=pool is None)
    logger.debug('reduced HTC at %s with K=%s: %s', g.label(i), sorted(known), 'holds' if witness else 'fails')
    return witness


def _unrestricted_pool(g: MixedGraph, i: int) -> t.List[int]:
    excluded = {i} | set(g.sib(i))
    return [w for w in g.nodes if w not in excluded]


def htc_infinite_to_one(g: MixedGraph, i: int) -> bool:
    """True when no system from V - ({i} | sib(i)) covers every parent of ``i``."""
    parents = g.pa(i)
    if not parents:
        return False
    return system_size(g, parents, _unrestricted_pool(g, i)) < len(parents)


def edge_not_identifiable(
    g: MixedGraph, j: int, i: int, known: t.AbstractSet[int] = frozenset()
) -> bool:
    """True when ``j -> i`` is generically not identifiable.

    The coefficients of the parents outside ``known`` can be moved along a
    fibre of the covariance map that changes ``j -> i`` exactly when dropping
    ``j`` from those targets leaves the maximum system size unchanged.
    """
    parents = g.pa(i) - frozenset(known)
    if j not in parents:
        return False
    pool = _unrestricted_pool(g, i)
    full = system_size(g, parents, pool)
    return system_size(g, parents - {j}, pool) == full


def unreachable_sibling_parent(g: MixedGraph, j: int, i: int) -> bool:
    """A sibling parent of ``i`` that no node outside {i} | sib(i) reaches by a half-trek."""
    if j not in g.sib(i):
        return False
    return system_size(g, {j}, _unrestricted_pool(g, i)) == 0
