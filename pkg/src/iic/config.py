"""Configuration loading.

Settings come from a YAML file validated against ``schemas/config.schema.json``.
Lookup order: explicit path, ``IIC_CONFIG`` environment variable, the bundled
``config/iic.yaml``, then the dataclass defaults below. ``IIC_RNG_SEED``
overrides the root experiment seed.
"""
from __future__ import annotations

import dataclasses
import functools
import hashlib
import json
import os
import typing as t
from pathlib import Path

import jsonschema
import yaml

from .exceptions import ConfigError, SchemaViolation

ROOT = Path(__file__).resolve().parents[2]
SCHEMA_DIR = ROOT / 'schemas'
DEFAULT_CONFIG = ROOT / 'config' / 'iic.yaml'
CONFIG_ENV = 'IIC_CONFIG'
SEED_ENV = 'IIC_RNG_SEED'


@dataclasses.dataclass(frozen=True)
class OracleSettings:
    trials: int = 50
    fd_step: float = 1e-7
    tol: float = 1e-8
    rank_rtol: float = 1e-10
    degeneracy_gap: float = 1e-7
    max_retries: int = 10
    jacobian: str = 'analytic'


@dataclasses.dataclass(frozen=True)
class SamplingSettings:
    coef_low: float = 0.5
    coef_high: float = 2.0
    conf_low: float = 0.1
    conf_high: float = 0.4


@dataclasses.dataclass(frozen=True)
class ClosureSettings:
    single_unknown: bool = True


@dataclasses.dataclass(frozen=True)
class EstimateSettings:
    n_boot: int = 200
    kappa_max: float = 1e8
    weak_instrument: float = 1e-3
    c0: float = 1.0
    ci_level: float = 0.95


@dataclasses.dataclass(frozen=True)
class ExperimentSettings:
    p_dir: float = 0.3
    p_bi: float = 0.2
    rng_seed: int = 20240611


@dataclasses.dataclass(frozen=True)
class CliSettings:
    discover_max_nodes: int = 12
    jobs: int = 1


@dataclasses.dataclass(frozen=True)
class Settings:
    oracle: OracleSettings = dataclasses.field(default_factory=OracleSettings)
    sampling: SamplingSettings = dataclasses.field(default_factory=SamplingSettings)
    closure: ClosureSettings = dataclasses.field(default_factory=ClosureSettings)
    estimate: EstimateSettings = dataclasses.field(default_factory=EstimateSettings)
    experiments: ExperimentSettings = dataclasses.field(default_factory=ExperimentSettings)
    cli: CliSettings = dataclasses.field(default_factory=CliSettings)
    source: str = '<defaults>'

    def as_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data.pop('source')
        return data

    def digest(self) -> str:
        """Short content hash recorded in every output header."""
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:12]


_SECTIONS: t.Dict[str, type] = {
    'oracle': OracleSettings,
    'sampling': SamplingSettings,
    'closure': ClosureSettings,
    'estimate': EstimateSettings,
    'experiments': ExperimentSettings,
    'cli': CliSettings,
}


def _validate(document: dict, source: str) -> None:
    schema = json.loads((SCHEMA_DIR / 'config.schema.json').read_text(encoding='utf-8'))
    validator = jsonschema.Draft7Validator(schema)
    errors = [
        f"Schema violation: {'/'.join(map(str, err.path)) or '<root>'}: {err.message}"
        for err in validator.iter_errors(document)
    ]
    if errors:
        raise SchemaViolation(source, errors)


def _coerce(section: type, values: dict) -> t.Any:
    defaults = section()
    kwargs = {}
    for field in dataclasses.fields(section):
        if field.name in values:
            kind = type(getattr(defaults, field.name))
            kwargs[field.name] = kind(values[field.name])
    return dataclasses.replace(defaults, **kwargs)


def resolve_config_path(explicit: t.Optional[t.Union[str, Path]] = None) -> t.Optional[Path]:
    if explicit:
        return Path(explicit)
    env = os.environ.get(CONFIG_ENV)
    if env:
        return Path(env)
    return DEFAULT_CONFIG if DEFAULT_CONFIG.exists() else None


def load_settings(path: t.Optional[t.Union[str, Path]] = None) -> Settings:
    """Load, validate and freeze settings; apply the ``IIC_RNG_SEED`` override."""
    config_path = resolve_config_path(path)
    document: dict = {}
    source = '<defaults>'
    if config_path is not None:
        if not config_path.exists():
            raise ConfigError(f'config file not found: {config_path}')
        try:
            document = yaml.safe_load(config_path.read_text(encoding='utf-8')) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f'invalid YAML in {config_path}: {e}') from e
        if not isinstance(document, dict):
            raise ConfigError(f'{config_path}: top level must be a mapping')
        _validate(document, str(config_path))
        source = str(config_path)

    sections = {name: _coerce(cls, document.get(name) or {}) for name, cls in _SECTIONS.items()}
    seed_override = os.environ.get(SEED_ENV)
    if seed_override:
        try:
            seed = int(seed_override, 0)
        except ValueError as e:
            raise ConfigError(f'{SEED_ENV} must be an integer, got {seed_override!r}') from e
        sections['experiments'] = dataclasses.replace(sections['experiments'], rng_seed=seed)
    return Settings(source=source, **sections)


@functools.lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()


def pick(value: t.Any, default: t.Any) -> t.Any:
    """Return ``value`` unless it is None."""
    return default if value is None else value
