"""Command line for classification, oracle checks, experiments and estimation.

Usage:
  # Classify every edge of a graph, with seeds from side information
  python -m iic classify graph.json --seeds seeds.json --out edges.csv

  # Pipe a bundled fixture through the classifier
  python -m iic fixture mr --seeds-out mr_seeds.json | python -m iic classify - --seeds mr_seeds.json

  # Compare the unseeded closure with the Jacobian oracle
  python -m iic verify graph.json --trials 50 --jobs 4

  # Reproduce an experiment table
  python -m iic bench interventions --n 6 --k 2 --graphs 1881 --jobs 8 --out interventions.csv

  # Simulate data and estimate along the witnesses
  python -m iic simulate --fixture six_node_estimation --samples 5000 --out data.csv
  python -m iic estimate graph.json --data data.csv --seeds seeds.json --boot 200

Exit codes:
  0 success
  1 domain error (cycle, invalid seed, infeasible perturbation, ...)
  2 usage error (bad arguments, missing or unreadable path)

Tables go to ``--out`` (``-`` = stdout, the default) with ``#`` header lines
recording version, rng seed, config hash and command. Summaries and logs go
to stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import typing as t
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .closure import ClosureRequest, iic_close
from .config import CONFIG_ENV, Settings, get_settings, pick
from .estimate import error_propagation_report, iic_estimate, simulate_data
from .exceptions import IICError
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .fixtures import FIXTURES, get_fixture
from .generators import GraphFamily
from .graph import EdgeStatus, MixedGraph
from .oracle import oracle_agrees_with_htc, sample_params
from .seeds import SeedSpec, discover_iv_triples, resolve_seeds, validate_iv_triple
from . import serialization as ser

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(name)s - %(message)s'


class UsageError(Exception):
    """Bad combination of arguments or a path that cannot be read."""


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt='%H:%M:%S', stream=sys.stderr, force=True)


def _say(args: argparse.Namespace, message: str = '') -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _readable(path: t.Optional[str], what: str) -> str:
    if path is None:
        raise UsageError(f'{what} is required')
    if path != ser.STDIO and not Path(path).is_file():
        raise UsageError(f'{what} not found: {path}')
    return path


def _graph(args: argparse.Namespace) -> MixedGraph:
    path = args.graph_opt or args.graph
    return ser.load_graph(_readable(path, 'graph file'))


def _seed_spec(args: argparse.Namespace, g: MixedGraph) -> SeedSpec:
    if not getattr(args, 'seeds', None):
        return SeedSpec()
    if args.seeds == ser.STDIO and (args.graph_opt or args.graph) == ser.STDIO:
        raise UsageError('graph and seeds cannot both come from stdin')
    return ser.load_seed_spec(_readable(args.seeds, 'seed file'), g)


def _header(args: argparse.Namespace, settings: Settings, rng_seed: t.Optional[int] = None) -> t.Dict[str, t.Any]:
    return ser.output_header(args.command_line, rng_seed, settings)


def _rng_seed(args: argparse.Namespace, settings: Settings) -> int:
    return pick(getattr(args, 'rng_seed', None), settings.experiments.rng_seed)


def _jobs(args: argparse.Namespace, settings: Settings) -> int:
    jobs = pick(getattr(args, 'jobs', None), settings.cli.jobs)
    if jobs < 1:
        raise UsageError(f'--jobs must be >= 1, got {jobs}')
    return jobs


# --- commands ----------------------------------------------------------------

def cmd_classify(args: argparse.Namespace, settings: Settings) -> int:
    """Classify every directed edge; optionally write the witnesses."""
    g = _graph(args)
    seeds = resolve_seeds(g, _seed_spec(args, g))
    single_unknown = False if args.no_single_unknown else None
    result = iic_close(ClosureRequest(graph=g, seed=seeds, single_unknown=single_unknown))
    header = _header(args, settings)
    ser.write_csv(ser.closure_rows(result), args.out, header)
    if args.emit_witnesses:
        ser.write_json(ser.witnesses_document(result, header), args.emit_witnesses)

    summary = result.summary()
    _say(args, '📊 Classification summary')
    _say(args, '=' * 60)
    for verdict in seeds.verdicts:
        mark = '✅' if verdict.t_to_y_ok else '⚠️' if verdict.z_to_t_ok else '❌'
        _say(args, f"{mark} IV ({', '.join(g.label(v) for v in verdict.triple)}): {verdict.reason}")
    _say(args, f'🔍 seed edges: {len(seeds)}   sweeps: {result.iterations}')
    _say(args, f"✅ {EdgeStatus.IDENTIFIED.value}: {summary[EdgeStatus.IDENTIFIED.value]}/{summary['total']}")
    _say(args, f'❌ {EdgeStatus.NON_IDENTIFIABLE.value}: {summary[EdgeStatus.NON_IDENTIFIABLE.value]}')
    _say(args, f'⚠️  {EdgeStatus.INCONCLUSIVE.value}: {summary[EdgeStatus.INCONCLUSIVE.value]}')
    return 0


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    """Unseeded closure against the Jacobian oracle; exit 1 on disagreement."""
    g = _graph(args)
    rng_seed = _rng_seed(args, settings)
    report = oracle_agrees_with_htc(
        g,
        trials=args.trials,
        rng_seed=rng_seed,
        settings=settings,
        tol=args.tol,
        jacobian_mode=args.jacobian,
        jobs=_jobs(args, settings),
    )
    frame = pd.DataFrame.from_records(report.records(), columns=['edge', 'iic_status', 'oracle_identifiable', 'agree'])
    ser.write_csv(frame, args.out, _header(args, settings, rng_seed))

    _say(args, '🔍 Oracle agreement')
    _say(args, '=' * 60)
    _say(args, f'📊 edges checked: {len(report.rows)}')
    if report.disagreements:
        for row in report.disagreements:
            _say(args, f'❌ {g.edge_label(row.edge)}: closure says {row.status.value}, oracle says '
                       f"{'identifiable' if row.oracle else 'not identifiable'}")
        return 1
    _say(args, '✅ closure and oracle agree on every edge')
    return 0


def _floats(text: t.Optional[str]) -> t.Optional[t.Tuple[float, ...]]:
    return tuple(float(v) for v in text.split(',')) if text else None


def _ints(text: t.Optional[str]) -> t.Optional[t.Tuple[int, ...]]:
    return tuple(int(v) for v in text.split(',')) if text else None


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    """Run one registered experiment and write its table."""
    if not args.experiment:
        for name, entry in EXPERIMENTS.items():
            print(f'{name:15s} {entry.description}')
        return 0
    rng_seed = _rng_seed(args, settings)
    try:
        cfg = ExperimentConfig(
            n=args.n,
            k=args.k,
            graphs=args.graphs,
            family=GraphFamily(args.family) if args.family else None,
            p_dir=args.p_dir,
            p_bi=args.p_bi,
            rng_seed=rng_seed,
            jobs=_jobs(args, settings),
            trials=args.trials,
            rates=_floats(args.rates),
            sample_sizes=_ints(args.sample_sizes),
            replications=args.replications,
            n_boot=args.boot,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    frame = run_experiment(args.experiment, cfg, settings)
    ser.write_csv(frame, args.out, _header(args, settings, rng_seed))
    _say(args, f'✅ {args.experiment}: {len(frame)} row(s) written to {args.out}')
    return 0


def cmd_estimate(args: argparse.Namespace, settings: Settings) -> int:
    """Plug-in estimates with bootstrap standard errors."""
    g = _graph(args)
    spec = _seed_spec(args, g)
    data = ser.load_dataset(_readable(args.data, 'data file'), g)
    rng_seed = _rng_seed(args, settings)
    result = iic_estimate(
        g, data, spec, n_boot=args.boot, rng_seed=rng_seed, settings=settings,
        jobs=_jobs(args, settings), strict=args.strict,
    )
    ser.write_csv(result.to_frame(), args.out, _header(args, settings, rng_seed))

    report = error_propagation_report(result)
    _say(args, '📊 Estimation summary')
    _say(args, '=' * 60)
    _say(args, f'✅ estimated: {len(result.estimates)}   bootstrap replicates: {result.n_boot}')
    for edge, reason in sorted(result.unestimated.items()):
        _say(args, f'⚠️  {g.edge_label(edge)} not estimated: {reason}')
    _say(args, f'🔍 deepest chain: {report.depth} solve(s), error constant C_d = {report.c_d:.3g}')
    return 0


def cmd_fixture(args: argparse.Namespace, settings: Settings) -> int:
    """Print a bundled graph as JSON."""
    if not args.name:
        for name in FIXTURES:
            print(name)
        return 0
    fx = get_fixture(args.name)
    ser.dump_graph(fx.graph, args.out, name=fx.name, description=fx.description)
    if args.seeds_out:
        ser.dump_seed_spec(fx.seeds, fx.graph, args.seeds_out)
    return 0


def cmd_discover_iv(args: argparse.Namespace, settings: Settings) -> int:
    """List instrument triples whose first stage validates."""
    g = _graph(args)
    rows = []
    for z, tt, y in discover_iv_triples(g, max_nodes=args.max_nodes):
        verdict = validate_iv_triple(g, z, tt, y)
        rows.append({
            'Z': g.label(z),
            'T': g.label(tt),
            'Y': g.label(y),
            't_to_y_ok': verdict.t_to_y_ok,
            'reason': verdict.reason,
        })
    frame = pd.DataFrame.from_records(rows, columns=['Z', 'T', 'Y', 't_to_y_ok', 'reason'])
    ser.write_csv(frame, args.out, _header(args, settings))
    _say(args, f'🔍 {len(rows)} triple(s) found')
    return 0


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    """Gaussian data from fixture parameters or a seeded random realization."""
    rng_seed = _rng_seed(args, settings)
    rng = np.random.default_rng(rng_seed)
    if args.fixture:
        fx = get_fixture(args.fixture)
        if fx.params is None:
            raise UsageError(f'fixture {args.fixture!r} carries no parameters')
        g, params = fx.graph, fx.params
        intervened = set(fx.seeds.intervened)
    else:
        g = _graph(args)
        params = sample_params(g, rng, settings)
        intervened = set()
    for name in args.intervene or ():
        intervened.add(g.index_of(name))
    if args.samples < 1:
        raise UsageError('--samples must be positive')
    data = simulate_data(params, args.samples, rng, sorted(intervened))
    ser.dump_dataset(data, g, args.out, _header(args, settings, rng_seed))
    if args.params_out:
        truth = pd.DataFrame(
            [{'edge': g.edge_label(e), 'value': float(params.B[e])} for e in g.edges()],
            columns=['edge', 'value'],
        )
        ser.write_csv(truth, args.params_out, _header(args, settings, rng_seed))
    _say(args, f'✅ {data.n_samples} sample(s) in {len(data.regimes())} regime(s)')
    return 0


# --- parser ------------------------------------------------------------------

def _add_graph(p: argparse.ArgumentParser) -> None:
    p.add_argument('graph', nargs='?', help="Graph JSON ('-' for stdin)")
    p.add_argument('--graph', dest='graph_opt', metavar='PATH', help='Graph JSON (alternative to the positional)')


def _add_common(p: argparse.ArgumentParser, rng: bool = False, jobs: bool = False) -> None:
    p.add_argument('--out', default=ser.STDIO, help="Output path ('-' for stdout)")
    if rng:
        p.add_argument('--rng-seed', type=int, help='Root random seed (fallback: IIC_RNG_SEED, then config)')
    if jobs:
        p.add_argument('--jobs', type=int, help='Worker processes')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='iic',
        description='Iterative identification closure for linear SEMs',
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--config', help=f'Settings YAML (fallback: {CONFIG_ENV}, then config/iic.yaml)')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    parser.add_argument('-q', '--quiet', action='store_true', help='Errors only, no summaries')
    sub = parser.add_subparsers(dest='command', help='Available commands')

    p = sub.add_parser('classify', help='Classify every directed edge')
    _add_graph(p)
    p.add_argument('--seeds', help='Seed spec JSON')
    p.add_argument('--no-single-unknown', action='store_true', help='Disable the single-unknown non-identifiability rule')
    p.add_argument('--emit-witnesses', metavar='PATH', help='Write witnesses and provenance as JSON')
    _add_common(p)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser('verify', help='Compare the unseeded closure with the Jacobian oracle')
    _add_graph(p)
    p.add_argument('--trials', type=int, help='Random realizations per edge')
    p.add_argument('--tol', type=float, help='Null-space coordinate tolerance')
    p.add_argument('--jacobian', choices=['analytic', 'central'], help='Jacobian evaluation')
    _add_common(p, rng=True, jobs=True)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser('bench', help='Run an experiment (omit the name to list them)')
    p.add_argument('experiment', nargs='?', help='Experiment name')
    p.add_argument('--n', type=int, help='Nodes per graph')
    p.add_argument('--k', type=int, help='Intervened nodes')
    p.add_argument('--graphs', type=int, help='Random graphs to draw')
    p.add_argument('--family', choices=[f.value for f in GraphFamily], help='Graph family')
    p.add_argument('--p-dir', type=float, help='Directed edge probability')
    p.add_argument('--p-bi', type=float, help='Bidirected edge probability')
    p.add_argument('--trials', type=int, help='Oracle realizations')
    p.add_argument('--rates', help='Comma-separated perturbation rates')
    p.add_argument('--sample-sizes', help='Comma-separated sample sizes')
    p.add_argument('--replications', type=int, help='Simulated data sets per sample size')
    p.add_argument('--boot', type=int, help='Bootstrap replicates')
    _add_common(p, rng=True, jobs=True)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser('estimate', help='Estimate identified edges from data')
    _add_graph(p)
    p.add_argument('--data', help="Data CSV: one column per node label, optional '__regime'")
    p.add_argument('--seeds', help='Seed spec JSON')
    p.add_argument('--boot', type=int, help='Bootstrap replicates')
    p.add_argument('--strict', action='store_true', help='Fail on ill-conditioned witness systems')
    _add_common(p, rng=True, jobs=True)
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser('fixture', help='Print a bundled graph (omit the name to list them)')
    p.add_argument('name', nargs='?', help='Fixture name')
    p.add_argument('--seeds-out', metavar='PATH', help="Also write the fixture's seed spec")
    _add_common(p)
    p.set_defaults(handler=cmd_fixture)

    p = sub.add_parser('discover-iv', help='List valid instrument triples')
    _add_graph(p)
    p.add_argument('--max-nodes', type=int, help='Refuse larger graphs')
    _add_common(p)
    p.set_defaults(handler=cmd_discover_iv)

    p = sub.add_parser('simulate', help='Write simulated data for a graph or an estimation fixture')
    _add_graph(p)
    p.add_argument('--fixture', choices=sorted(FIXTURES), help='Use a fixture and its parameters')
    p.add_argument('--samples', type=int, default=1000, help='Samples per regime')
    p.add_argument('--intervene', action='append', metavar='NODE', help='Add an intervention regime (repeatable)')
    p.add_argument('--params-out', metavar='PATH', help='Write the true edge coefficients')
    _add_common(p, rng=True)
    p.set_defaults(handler=cmd_simulate)

    return parser


def _load_settings(path: t.Optional[str]) -> Settings:
    if path:
        if not Path(path).is_file():
            raise UsageError(f'config file not found: {path}')
        # worker processes resolve settings through the environment
        os.environ[CONFIG_ENV] = str(Path(path).resolve())
    get_settings.cache_clear()
    return get_settings()


def main(argv: t.List[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.command_line = ' '.join(['iic'] + list(argv))
    _configure_logging(args.verbose, args.quiet)

    if not args.command:
        parser.print_help()
        return 0

    try:
        settings = _load_settings(args.config)
        return args.handler(args, settings)
    except UsageError as e:
        print(f'❌ {e}', file=sys.stderr)
        return 2
    except OSError as e:
        print(f'❌ {e}', file=sys.stderr)
        return 2
    except IICError as e:
        print(f'❌ {e}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    raise SystemExit(main(sys.argv[1:]))
