"""Run configuration.

Values are layered: built-in defaults, then the YAML/JSON file named by
``DOI_TOOL_CONFIG`` (or ``--config``), then ``DOI_TOOL_<FIELD>`` environment
variables, then command-line flags.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .doi import ValidityStatus
from .resolvers import CachedResolver, CacheStore, FixtureResolver, HttpSettings, LiveResolver, load_fixture

ENV_CONFIG = "DOI_TOOL_CONFIG"
ENV_PREFIX = "DOI_TOOL_"


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    ruleset: str = "extended"
    baseline_ruleset: str = "baseline"
    fixture: str | None = None
    fixture_default: str = "invalid"
    cache: str | None = None
    rate: float = 10.0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 0
    top_n: int = 10
    per_rule: int = 10
    post_cleaning: bool = False
    out: str = "reports"
    compare: list[str] | None = None
    mailto: str = ""
    doi_api_base: str = "https://doi.org"
    crossref_api_base: str = "https://api.crossref.org"
    datacite_api_base: str = "https://api.datacite.org"
    medra_api_base: str = "https://api.medra.org"

    @property
    def resolver_mode(self) -> str:
        return f"fixture:{self.fixture}" if self.fixture else "live"

    def http_settings(self) -> HttpSettings:
        return HttpSettings(
            doi_api_base=self.doi_api_base,
            crossref_api_base=self.crossref_api_base,
            datacite_api_base=self.datacite_api_base,
            medra_api_base=self.medra_api_base,
            mailto=self.mailto,
            rate=self.rate,
        )

    def build_resolver(self) -> CachedResolver:
        """Fixture mode never touches the network and ignores ``cache``."""
        if self.fixture:
            try:
                default = ValidityStatus(self.fixture_default)
                inner: FixtureResolver | LiveResolver = load_fixture(self.fixture, default=default)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            return CachedResolver(inner, CacheStore())
        return CachedResolver(LiveResolver(self.http_settings()), CacheStore(self.cache))


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value: Any) -> Any:
    default = RunConfig()
    current = getattr(default, name)
    if value is None:
        return None
    if name == "compare":
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        return list(value)
    if isinstance(current, bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    return str(value)


def _apply(cfg: RunConfig, values: Mapping[str, Any], origin: str) -> None:
    for name, value in values.items():
        key = name.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"{origin}: unknown setting {name!r}")
        try:
            setattr(cfg, key, _coerce(key, value))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{origin}: bad value for {name!r}: {value!r}") from exc


def load_config(
    flags: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
    config_file: str | None = None,
) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = RunConfig()
    path = config_file or environ.get(ENV_CONFIG)
    if path:
        try:
            doc = yaml.safe_load(Path(path).read_text("utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a mapping")
        _apply(cfg, doc, path)
    env_values = {
        k[len(ENV_PREFIX):].lower(): v
        for k, v in environ.items()
        if k.startswith(ENV_PREFIX) and k != ENV_CONFIG and k[len(ENV_PREFIX):].lower() in _FIELDS
    }
    _apply(cfg, env_values, "environment")
    _apply(cfg, {k: v for k, v in (flags or {}).items() if v is not None}, "flags")
    if cfg.rate <= 0 or cfg.workers < 1 or cfg.top_n < 1 or cfg.per_rule < 0:
        raise ConfigError("rate, workers and top_n must be positive; per_rule non-negative")
    if cfg.fixture_default not in ("invalid", "unknown"):
        raise ConfigError("fixture_default must be 'invalid' or 'unknown'")
    return cfg
