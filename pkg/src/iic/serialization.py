"""On-disk formats: graph and seed-spec JSON, witness JSON, CSV tables, data files.

``-`` as a path means standard input (readers) or standard output (writers),
so ``iic fixture mr | iic classify -`` works. JSON inputs are validated
against the schemas in ``schemas/`` before anything is built from them.
"""
from __future__ import annotations

import io
import json
import logging
import sys
import typing as t
from pathlib import Path

import jsonschema
import numpy as np
import pandas as pd

from . import __version__
from .closure import ClosureResult
from .config import SCHEMA_DIR, Settings
from .estimate import OBSERVATIONAL, REGIME_COLUMN, Dataset
from .exceptions import InputError, SchemaViolation
from .graph import MixedGraph, build_graph
from .halftrek import Witness
from .seeds import SeedSpec

logger = logging.getLogger(__name__)

PathLike = t.Union[str, Path]
STDIO = '-'


def _read_text(path: PathLike) -> str:
    if str(path) == STDIO:
        return sys.stdin.read()
    return Path(path).read_text(encoding='utf-8')


def _write_text(text: str, path: PathLike) -> None:
    if str(path) == STDIO:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding='utf-8')


def _load_json(path: PathLike) -> t.Any:
    source = 'stdin' if str(path) == STDIO else str(path)
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise InputError(f'{source}: invalid JSON: {e}') from e


def validate_document(document: t.Any, schema_name: str, source: str) -> None:
    schema = json.loads((SCHEMA_DIR / schema_name).read_text(encoding='utf-8'))
    validator = jsonschema.Draft7Validator(schema)
    errors = [
        f"Schema violation: {'/'.join(map(str, err.path)) or '<root>'}: {err.message}"
        for err in sorted(validator.iter_errors(document), key=lambda e: list(map(str, e.path)))
    ]
    if errors:
        raise SchemaViolation(source, errors)


# --- graphs ------------------------------------------------------------------

def graph_to_dict(g: MixedGraph) -> t.Dict[str, t.Any]:
    doc: t.Dict[str, t.Any] = {
        'n': g.n_nodes,
        'directed': [list(e) for e in g.edges()],
        'bidirected': [list(e) for e in g.bidirected_edges()],
    }
    if g.has_custom_labels():
        doc['labels'] = {str(i): lbl for i, lbl in enumerate(g.labels)}
    return doc


def graph_from_dict(doc: t.Any, source: str = '<graph>') -> MixedGraph:
    validate_document(doc, 'graph.schema.json', source)
    labels = {int(k): v for k, v in (doc.get('labels') or {}).items()}
    return build_graph(doc['n'], doc.get('directed', ()), doc.get('bidirected', ()), labels or None)


def load_graph(path: PathLike) -> MixedGraph:
    source = 'stdin' if str(path) == STDIO else str(path)
    g = graph_from_dict(_load_json(path), source)
    logger.debug('loaded %s from %s', g, source)
    return g


def dump_graph(g: MixedGraph, path: PathLike = STDIO, **extra: t.Any) -> None:
    doc = graph_to_dict(g)
    doc.update({k: v for k, v in extra.items() if v is not None})
    _write_text(json.dumps(doc, indent=2) + '\n', path)


# --- seed specs --------------------------------------------------------------

def seed_spec_from_dict(doc: t.Any, g: MixedGraph, source: str = '<seeds>') -> SeedSpec:
    """Build a ``SeedSpec``; nodes may be given as labels or indices."""
    validate_document(doc, 'seed-spec.schema.json', source)
    prior = [
        [g.index_of(item['edge'][0]), g.index_of(item['edge'][1]), item.get('value')]
        for item in doc.get('prior', ())
    ]
    return SeedSpec.build(
        iv=[[g.index_of(v) for v in triple] for triple in doc.get('iv', ())],
        intervened=[g.index_of(v) for v in doc.get('intervened', ())],
        use_ng_rule=bool(doc.get('ng_rule', False)),
        prior=prior,
        exogenous=bool(doc.get('exogenous', False)),
    )


def seed_spec_to_dict(spec: SeedSpec, g: MixedGraph) -> t.Dict[str, t.Any]:
    doc: t.Dict[str, t.Any] = {}
    if spec.iv_triples:
        doc['iv'] = [[g.label(v) for v in triple] for triple in spec.iv_triples]
    if spec.intervened:
        doc['intervened'] = [g.label(v) for v in sorted(spec.intervened)]
    if spec.use_ng_rule:
        doc['ng_rule'] = True
    if spec.exogenous:
        doc['exogenous'] = True
    if spec.prior_edges:
        doc['prior'] = [
            {'edge': [g.label(j), g.label(i)], 'value': value} for j, i, value in spec.prior_edges
        ]
    return doc


def load_seed_spec(path: PathLike, g: MixedGraph) -> SeedSpec:
    source = 'stdin' if str(path) == STDIO else str(path)
    return seed_spec_from_dict(_load_json(path), g, source)


def dump_seed_spec(spec: SeedSpec, g: MixedGraph, path: PathLike) -> None:
    _write_text(json.dumps(seed_spec_to_dict(spec, g), indent=2) + '\n', path)


# --- closure output ----------------------------------------------------------

def witness_to_dict(g: MixedGraph, witness: Witness) -> t.Dict[str, t.Any]:
    return {
        'node': g.label(witness.node),
        'reduced': witness.reduced,
        'known_parents': [g.label(k) for k in sorted(witness.known_parents)],
        'sources': [g.label(w) for w in witness.sources],
        'treks': [
            {
                'target': g.label(target),
                'source': g.label(trek.source),
                'kind': trek.kind.value,
                'path': [g.label(v) for v in trek.path_nodes],
            }
            for target, trek in sorted(witness.system.items())
        ],
        'adjustments': {
            g.label(w): [g.label(p) for p in parents]
            for w, parents in sorted(witness.adjustments.items())
            if parents
        },
    }


def closure_rows(result: ClosureResult) -> pd.DataFrame:
    return pd.DataFrame.from_records(
        result.rows(), columns=['edge', 'status', 'rule', 'iteration', 'witness_sources'],
    )


def witnesses_document(result: ClosureResult, header: t.Optional[t.Mapping[str, t.Any]] = None) -> t.Dict[str, t.Any]:
    """Provenance of every classified edge; shared witnesses are repeated per edge."""
    g = result.graph
    edges = []
    for edge in sorted(result.status):
        prov = result.provenance[edge]
        entry: t.Dict[str, t.Any] = {
            'edge': g.edge_label(edge),
            'status': result.status[edge].value,
            'rule': prov.rule.value if prov.rule else None,
            'iteration': prov.iteration,
        }
        if prov.tag is not None:
            entry['estimator'] = prov.tag.value
        if prov.witness is not None:
            entry['witness'] = witness_to_dict(g, prov.witness)
        edges.append(entry)
    return {
        'meta': dict(header or {}),
        'graph': graph_to_dict(g),
        'iterations': result.iterations,
        'edges': edges,
    }


def write_json(doc: t.Any, path: PathLike) -> None:
    _write_text(json.dumps(doc, indent=2, default=str) + '\n', path)


# --- CSV ---------------------------------------------------------------------

def output_header(command: str, rng_seed: t.Optional[int], settings: Settings) -> t.Dict[str, t.Any]:
    return {
        'tool': f'iic {__version__}',
        'rng_seed': rng_seed if rng_seed is not None else 'none',
        'config_hash': settings.digest(),
        'command': command,
    }


def write_csv(frame: pd.DataFrame, path: PathLike = STDIO, header: t.Optional[t.Mapping[str, t.Any]] = None) -> None:
    """``#``-prefixed header lines (then ``frame.attrs``), then the table."""
    buf = io.StringIO()
    for key, value in list((header or {}).items()) + list(frame.attrs.items()):
        buf.write(f'# {key}: {value}\n')
    frame.to_csv(buf, index=False, float_format='%.10g', lineterminator='\n')
    _write_text(buf.getvalue(), path)


def read_csv(path: PathLike) -> pd.DataFrame:
    source = sys.stdin if str(path) == STDIO else path
    return pd.read_csv(source, comment='#')


# --- data --------------------------------------------------------------------

def load_dataset(path: PathLike, g: MixedGraph) -> Dataset:
    """Columns are matched to node labels; an optional ``__regime`` column tags rows."""
    frame = read_csv(path)
    source = 'stdin' if str(path) == STDIO else str(path)
    missing = [lbl for lbl in g.labels if lbl not in frame.columns]
    if missing:
        raise InputError(f'{source}: no column for node(s) {", ".join(missing)}')
    X = frame[list(g.labels)].to_numpy(dtype=float)
    regime = None
    if REGIME_COLUMN in frame.columns:
        regime = np.array([_regime_tag(v, g) for v in frame[REGIME_COLUMN]], dtype=int)
    try:
        data = Dataset(X, regime)
    except ValueError as e:
        raise InputError(f'{source}: {e}') from e
    logger.info('loaded %d sample(s) in %d regime(s) from %s', data.n_samples, len(data.regimes()), source)
    return data


def _regime_tag(value: t.Any, g: MixedGraph) -> int:
    text = str(value).strip()
    try:
        tag = int(float(text))
    except ValueError:
        return g.index_of(text)
    if tag != OBSERVATIONAL:
        g.label(tag)
    return tag


def dump_dataset(data: Dataset, g: MixedGraph, path: PathLike = STDIO, header: t.Optional[t.Mapping[str, t.Any]] = None) -> None:
    write_csv(data.to_frame(g.labels), path, header)
