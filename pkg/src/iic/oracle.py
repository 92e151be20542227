"""Numerical ground truth for generic identifiability.

The model is ``X = B^T X + eps`` with ``Cov(eps) = Omega``, so with
``A = (I - B)^-1`` the observed covariance is ``Sigma = A^T Omega A`` and the
total effect of ``j`` on ``i`` is ``A[j, i]``.

An edge coefficient is locally identifiable at a parameter point when no
direction in the kernel of the Jacobian of ``theta -> upper(Sigma)`` moves
it. Checking this at random points drawn from a continuous distribution
decides generic identifiability with probability one.
"""
from __future__ import annotations

import dataclasses
import logging
import typing as t

import numpy as np

from .closure import ClosureResult, iic_close_unseeded
from .config import Settings, get_settings, pick
from .exceptions import DegenerateRealization, EdgeNotInGraph
from .graph import Edge, EdgeStatus, MixedGraph
from .parallel import parallel_map

logger = logging.getLogger(__name__)

Param = t.Tuple[str, int, int]
RngLike = t.Union[None, int, np.random.Generator, np.random.SeedSequence]


@dataclasses.dataclass(frozen=True)
class ParamRealization:
    B: np.ndarray
    omega: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.B.shape[0]

    def total_effects(self) -> np.ndarray:
        return np.linalg.inv(np.eye(self.n_nodes) - self.B)


def _rng(seed: RngLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_params(
    g: MixedGraph, rng_seed: RngLike = None, settings: t.Optional[Settings] = None
) -> ParamRealization:
    """Coefficients from +-U[low, high]; unit error variances; +-U confounding.

    When the confounded error covariance is not positive definite the
    diagonal is raised to make it strictly diagonally dominant.
    """
    cfg = (settings or get_settings()).sampling
    rng = _rng(rng_seed)
    n = g.n_nodes
    B = np.zeros((n, n))
    for j, i in g.edges():
        B[j, i] = rng.choice((-1.0, 1.0)) * rng.uniform(cfg.coef_low, cfg.coef_high)
    omega = np.eye(n)
    for a, b in g.bidirected_edges():
        omega[a, b] = omega[b, a] = rng.choice((-1.0, 1.0)) * rng.uniform(cfg.conf_low, cfg.conf_high)
    try:
        np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        off = np.abs(omega).sum(axis=1) - np.abs(np.diag(omega))
        np.fill_diagonal(omega, 1.0 + off)
        logger.debug('raised Omega diagonal to %s for positive definiteness', np.round(np.diag(omega), 3))
    return ParamRealization(B=B, omega=omega)


def implied_cov(p: ParamRealization) -> np.ndarray:
    A = p.total_effects()
    sigma = A.T @ p.omega @ A
    return (sigma + sigma.T) / 2.0


# --- parameterization --------------------------------------------------------

def free_parameters(g: MixedGraph) -> t.List[Param]:
    """Coordinate order: edge coefficients, error variances, error covariances."""
    params: t.List[Param] = [('B', j, i) for j, i in g.edges()]
    params += [('O', a, a) for a in g.nodes]
    params += [('O', a, b) for a, b in g.bidirected_edges()]
    return params


def _pack(g: MixedGraph, p: ParamRealization) -> np.ndarray:
    return np.array([p.B[j, i] if kind == 'B' else p.omega[j, i] for kind, j, i in free_parameters(g)])


def _unpack(g: MixedGraph, theta: np.ndarray) -> ParamRealization:
    n = g.n_nodes
    B = np.zeros((n, n))
    omega = np.zeros((n, n))
    for value, (kind, j, i) in zip(theta, free_parameters(g)):
        if kind == 'B':
            B[j, i] = value
        else:
            omega[j, i] = omega[i, j] = value
    return ParamRealization(B=B, omega=omega)


def analytic_jacobian(g: MixedGraph, p: ParamRealization) -> np.ndarray:
    """Rows: upper triangle of Sigma (row-major); columns: ``free_parameters``."""
    n = g.n_nodes
    rows = np.triu_indices(n)
    A = p.total_effects()
    columns = []
    for kind, j, i in free_parameters(g):
        if kind == 'B':
            G = np.outer(A[:, j], A[i, :])
            H = G.T @ p.omega @ A
            d_sigma = H + H.T
        else:
            E = np.zeros((n, n))
            E[j, i] = E[i, j] = 1.0
            d_sigma = A.T @ E @ A
        columns.append(d_sigma[rows])
    if not columns:
        return np.zeros((len(rows[0]), 0))
    return np.column_stack(columns)


def central_jacobian(g: MixedGraph, p: ParamRealization, fd_step: t.Optional[float] = None) -> np.ndarray:
    h = pick(fd_step, get_settings().oracle.fd_step)
    rows = np.triu_indices(g.n_nodes)
    theta = _pack(g, p)
    columns = []
    for k in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[k] += h
        down[k] -= h
        diff = implied_cov(_unpack(g, up)) - implied_cov(_unpack(g, down))
        columns.append(diff[rows] / (2.0 * h))
    if not columns:
        return np.zeros((len(rows[0]), 0))
    return np.column_stack(columns)


def jacobian(g: MixedGraph, p: ParamRealization, mode: str = 'analytic', fd_step: t.Optional[float] = None) -> np.ndarray:
    if mode == 'analytic':
        return analytic_jacobian(g, p)
    if mode == 'central':
        return central_jacobian(g, p, fd_step)
    raise ValueError(f'unknown Jacobian mode {mode!r}')


# --- null-space test ---------------------------------------------------------

class NullSpace(t.NamedTuple):
    basis: np.ndarray
    rank: int
    gap_ratio: float


def null_space(J: np.ndarray, rtol: float) -> NullSpace:
    """Orthonormal kernel basis (rows) with an SVD threshold of max(dim) * s1 * rtol."""
    n_params = J.shape[1]
    if n_params == 0:
        return NullSpace(np.zeros((0, 0)), 0, 1.0)
    _, s, vt = np.linalg.svd(J, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return NullSpace(vt, 0, 1.0)
    threshold = max(J.shape) * s[0] * rtol
    rank = int(np.sum(s > threshold))
    gap_ratio = float(s[rank - 1] / s[0]) if rank else 1.0
    return NullSpace(vt[rank:], rank, gap_ratio)


def _tolerances(mode: str, settings: Settings) -> t.Tuple[float, float, float]:
    cfg = settings.oracle
    if mode == 'analytic':
        return cfg.rank_rtol, cfg.tol, cfg.degeneracy_gap
    # finite differences carry roundoff of order eps / fd_step
    floor = float(np.sqrt(np.finfo(float).eps))
    rtol = max(cfg.rank_rtol, floor)
    return rtol, max(cfg.tol, 1e3 * floor), max(cfg.degeneracy_gap, 1e3 * rtol)


def _kernel(
    g: MixedGraph, rng: np.random.Generator, mode: str, settings: Settings
) -> np.ndarray:
    rtol, _, gap = _tolerances(mode, settings)
    ratio = 0.0
    for attempt in range(1, settings.oracle.max_retries + 1):
        p = sample_params(g, rng, settings)
        J = jacobian(g, p, mode, settings.oracle.fd_step)
        kernel = null_space(J, rtol)
        ratio = kernel.gap_ratio
        if ratio >= gap:
            return kernel.basis
        logger.warning('near-degenerate realization (gap ratio %.2e), resampling (attempt %d)', ratio, attempt)
    raise DegenerateRealization(settings.oracle.max_retries, ratio)


def oracle_verdicts(
    g: MixedGraph,
    edges: t.Optional[t.Iterable[Edge]] = None,
    trials: t.Optional[int] = None,
    tol: t.Optional[float] = None,
    rng_seed: RngLike = None,
    jacobian_mode: t.Optional[str] = None,
    settings: t.Optional[Settings] = None,
) -> t.Dict[Edge, bool]:
    """Oracle verdict for several edges, sharing realizations across them."""
    settings = settings or get_settings()
    mode = pick(jacobian_mode, settings.oracle.jacobian)
    n_trials = pick(trials, settings.oracle.trials)
    targets = sorted(edges) if edges is not None else g.edges()
    for edge in targets:
        if not g.has_edge(*edge):
            raise EdgeNotInGraph(edge)
    _, default_tol, _ = _tolerances(mode, settings)
    coord_tol = pick(tol, default_tol)

    column = {(j, i): k for k, (kind, j, i) in enumerate(free_parameters(g)) if kind == 'B'}
    verdict = {edge: True for edge in targets}
    rng = _rng(rng_seed)
    for _ in range(n_trials):
        pending = [e for e in targets if verdict[e]]
        if not pending:
            break
        basis = _kernel(g, rng, mode, settings)
        if basis.shape[0] == 0:
            continue
        for edge in pending:
            if np.linalg.norm(basis[:, column[edge]]) > coord_tol:
                verdict[edge] = False
    logger.debug('oracle on %s: %d/%d identifiable', g, sum(verdict.values()), len(verdict))
    return verdict


def oracle_identifiable(
    g: MixedGraph,
    edge: Edge,
    trials: t.Optional[int] = None,
    fd_step: t.Optional[float] = None,
    tol: t.Optional[float] = None,
    rng_seed: RngLike = None,
    jacobian_mode: t.Optional[str] = None,
    settings: t.Optional[Settings] = None,
) -> bool:
    settings = settings or get_settings()
    if fd_step is not None:
        settings = dataclasses.replace(settings, oracle=dataclasses.replace(settings.oracle, fd_step=fd_step))
    return oracle_verdicts(g, [edge], trials, tol, rng_seed, jacobian_mode, settings)[edge]


# --- agreement report --------------------------------------------------------

class AgreementRow(t.NamedTuple):
    edge: Edge
    status: EdgeStatus
    oracle: bool
    agree: bool


@dataclasses.dataclass(frozen=True)
class AgreementReport:
    graph: MixedGraph
    rows: t.Tuple[AgreementRow, ...]

    @property
    def disagreements(self) -> t.List[AgreementRow]:
        return [r for r in self.rows if not r.agree]

    def records(self) -> t.List[t.Dict[str, t.Any]]:
        return [
            {
                'edge': self.graph.edge_label(r.edge),
                'iic_status': r.status.value,
                'oracle_identifiable': r.oracle,
                'agree': r.agree,
            }
            for r in self.rows
        ]


def _agrees(status: EdgeStatus, identifiable: bool) -> bool:
    if status is EdgeStatus.IDENTIFIED:
        return identifiable
    if status is EdgeStatus.NON_IDENTIFIABLE:
        return not identifiable
    return True


def _verdict_chunk(task: t.Tuple) -> t.Dict[Edge, bool]:
    g, edges, trials, tol, rng_seed, mode, settings = task
    return oracle_verdicts(g, edges, trials, tol, rng_seed, mode, settings)


def oracle_agrees_with_htc(
    g: MixedGraph,
    result: t.Optional[ClosureResult] = None,
    trials: t.Optional[int] = None,
    rng_seed: t.Optional[int] = None,
    settings: t.Optional[Settings] = None,
    tol: t.Optional[float] = None,
    jacobian_mode: t.Optional[str] = None,
    jobs: int = 1,
) -> AgreementReport:
    """Compare a closure result (the unseeded one by default) with the oracle.

    With ``jobs > 1`` the edges are split across workers; every worker draws
    the same realizations from ``rng_seed``, so verdicts match the serial run.
    """
    if result is None:
        result = iic_close_unseeded(g)
    edges = sorted(result.status)
    chunks = [edges[k::jobs] for k in range(jobs)] if jobs > 1 else [edges]
    tasks = [(g, chunk, trials, tol, rng_seed, jacobian_mode, settings) for chunk in chunks if chunk]
    verdicts: t.Dict[Edge, bool] = {}
    for part in parallel_map(_verdict_chunk, tasks, jobs):
        verdicts.update(part)
    rows = tuple(
        AgreementRow(edge, status, verdicts[edge], _agrees(status, verdicts[edge]))
        for edge, status in sorted(result.status.items())
    )
    report = AgreementReport(graph=g, rows=rows)
    if report.disagreements:
        logger.warning('oracle disagrees on %d edge(s) of %s', len(report.disagreements), g)
    return report
