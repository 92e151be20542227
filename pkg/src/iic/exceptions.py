"""Exception hierarchy for the iic package.

Every error raised on purpose by the library derives from ``IICError`` so the
CLI can map it to exit code 1 with a one-line diagnostic.
"""
from __future__ import annotations

import typing as t


class IICError(Exception):
    """Base class for all domain errors."""


# --- graph -----------------------------------------------------------------

class GraphError(IICError):
    pass


class CycleDetected(GraphError):
    def __init__(self, cycle: t.Sequence[t.Tuple[int, int]]):
        self.cycle = list(cycle)
        path = ' -> '.join(str(j) for j, _ in self.cycle)
        if self.cycle:
            path += f' -> {self.cycle[-1][1]}'
        super().__init__(f'directed part is not acyclic: {path}')


class SelfLoop(GraphError):
    def __init__(self, node: int, kind: str = 'directed'):
        self.node = node
        self.kind = kind
        super().__init__(f'{kind} self-loop at node {node}')


class IndexOutOfRange(GraphError):
    def __init__(self, index: int, n_nodes: int):
        self.index = index
        self.n_nodes = n_nodes
        super().__init__(f'node index {index} outside 0..{n_nodes - 1}')


class UnknownNodeLabel(GraphError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f'no node labelled {label!r}')


class EdgeNotInGraph(GraphError):
    def __init__(self, edge: t.Tuple[int, int]):
        self.edge = tuple(edge)
        super().__init__(f'{self.edge[0]}->{self.edge[1]} is not a directed edge of the graph')


# --- criteria / seeds --------------------------------------------------------

class HTCError(IICError):
    pass


class KnownNotSubsetOfParents(HTCError):
    def __init__(self, node: int, extra: t.Iterable[int]):
        self.node = node
        self.extra = sorted(extra)
        super().__init__(f'known set contains non-parents of {node}: {self.extra}')


class SeedError(IICError):
    pass


class InvalidTriple(SeedError):
    def __init__(self, triple: t.Tuple[int, int, int], reason: str):
        self.triple = tuple(triple)
        self.reason = reason
        super().__init__(f'invalid IV triple {self.triple}: {reason}')


class PriorEdgeNotInGraph(SeedError):
    def __init__(self, edge: t.Tuple[int, int]):
        self.edge = tuple(edge)
        super().__init__(f'prior edge {self.edge[0]}->{self.edge[1]} is not a directed edge of the graph')


class EmptySeed(SeedError):
    def __init__(self) -> None:
        super().__init__('propagation gain is undefined for an empty seed set')


# --- oracle / experiments ----------------------------------------------------

class OracleError(IICError):
    pass


class DegenerateRealization(OracleError):
    def __init__(self, attempts: int, ratio: float):
        self.attempts = attempts
        self.ratio = ratio
        super().__init__(
            f'no well-separated Jacobian spectrum after {attempts} realization(s) '
            f'(gap ratio {ratio:.3e})'
        )


class ExperimentError(IICError):
    pass


class UnknownExperiment(ExperimentError):
    def __init__(self, name: str, known: t.Iterable[str]):
        self.name = name
        self.known = sorted(known)
        super().__init__(f"unknown experiment {name!r}; choose from: {', '.join(self.known)}")


class InfeasiblePerturbation(ExperimentError):
    def __init__(self, kind: str, reason: str):
        self.kind = kind
        super().__init__(f'cannot apply {kind}: {reason}')


class GraphTooLarge(ExperimentError):
    def __init__(self, n_nodes: int, limit: int):
        self.n_nodes = n_nodes
        self.limit = limit
        super().__init__(f'graph has {n_nodes} nodes; brute-force search is limited to {limit}')


# --- estimation --------------------------------------------------------------

class EstimationError(IICError):
    pass


class TooFewSamples(EstimationError):
    def __init__(self, n_samples: int, required: int, regime: t.Optional[int] = None):
        self.n_samples = n_samples
        self.required = required
        self.regime = regime
        where = '' if regime is None else f' in regime {regime}'
        super().__init__(f'{n_samples} sample(s) given{where}, at least {required} required')


class IllConditionedSystem(EstimationError):
    def __init__(self, node: int, kappa: float, limit: float):
        self.node = node
        self.kappa = kappa
        self.limit = limit
        super().__init__(f'witness system for node {node} has condition number {kappa:.3e} > {limit:.1e}')


class MissingRegimeData(EstimationError):
    def __init__(self, node: int):
        self.node = node
        super().__init__(f'no samples from the regime intervening on node {node}')


class SingularDesign(EstimationError):
    def __init__(self, node: int):
        self.node = node
        super().__init__(f'parent design matrix of node {node} is singular')


class WeakInstrument(EstimationError):
    def __init__(self, cov: float, threshold: float):
        self.cov = cov
        self.threshold = threshold
        super().__init__(f'|Cov(Z,T)| = {abs(cov):.3e} below weak-instrument threshold {threshold:.1e}')


# --- input -------------------------------------------------------------------

class InputError(IICError):
    pass


class SchemaViolation(InputError):
    def __init__(self, source: str, errors: t.Sequence[str]):
        self.source = source
        self.errors = list(errors)
        first = self.errors[0] if self.errors else 'invalid document'
        more = f' (+{len(self.errors) - 1} more)' if len(self.errors) > 1 else ''
        super().__init__(f'{source}: {first}{more}')


class ConfigError(InputError):
    pass


class UnknownFixture(InputError):
    def __init__(self, name: str, known: t.Iterable[str]):
        self.name = name
        self.known = sorted(known)
        super().__init__(f"unknown fixture {name!r}; choose from: {', '.join(self.known)}")
