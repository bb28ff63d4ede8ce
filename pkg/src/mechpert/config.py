"""Run configuration: one JSON document, strictly validated.

Unknown keys are rejected (silent typos would quietly change what a run
computes), every path is checked at load time, and the resolved config
serializes to canonical JSON so each command can drop a byte-stable snapshot
next to its outputs.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .providers import (
    DEFAULT_REQUEST_TEMPLATE,
    DEFAULT_RESPONSE_PATH,
    DEFAULT_TOKEN_ENV,
    CacheReplayProvider,
    CachingProvider,
    HttpProvider,
    Provider,
)

PROVIDER_TYPES = ("http", "cache", "synthetic")

_PROVIDER_KEYS = {
    "type",
    "model",
    "cache_dir",
    # http
    "url",
    "token_env",
    "request_template",
    "response_path",
    "timeout",
    # synthetic
    "synthetic_seed",
    "n_genes",
    "p_true",
    "distractor_mean",
}


def _default_provider() -> dict:
    return {"type": "synthetic", "synthetic_seed": 0}


def _default_sizes() -> list[int]:
    return [50, 100, 200, 500, 800]


def _default_seeds() -> list[int]:
    return [0]


def _default_strategies() -> list[str]:
    return ["semantic", "binary", "confidence"]


@dataclass
class RunConfig:
    dataset_path: str | None = None
    ppi_path: str | None = None
    min_score: int = 700
    euclidean_path: str | None = None
    poincare_path: str | None = None
    provider: dict = field(default_factory=_default_provider)
    strategy: str = "confidence"
    strategies: list[str] = field(default_factory=_default_strategies)
    cell_line: str = ""
    k_chains: int = 3
    temperature: float = 0.7
    alpha: float = 0.85
    beta: float = 1.0
    top_reachable: int = 50
    pct_harmonizer: float = 20.0
    pct_spectral: float = 15.0
    k_range: str = "5"
    sizes: list[int] = field(default_factory=_default_sizes)
    seeds: list[int] = field(default_factory=_default_seeds)
    budget: int = 50
    batch: int = 10
    min_votes: int = 1
    max_targets: int = 100
    output_dir: str = "runs"

    def validate(self) -> None:
        if self.provider.get("type") not in PROVIDER_TYPES:
            raise ConfigError(f"provider.type must be one of {PROVIDER_TYPES}")
        unknown = set(self.provider) - _PROVIDER_KEYS
        if unknown:
            raise ConfigError(f"unknown provider keys: {sorted(unknown)}")
        for name in ("dataset_path", "ppi_path", "euclidean_path", "poincare_path"):
            path = getattr(self, name)
            if path is not None and not os.path.isfile(path):
                raise ConfigError(f"{name} does not exist: {path}")
        if not (0 <= self.min_score <= 1000):
            raise ConfigError(f"min_score must be in [0, 1000]: {self.min_score}")
        if self.k_chains < 1:
            raise ConfigError("k_chains must be >= 1")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError("alpha must be in (0, 1)")
        if self.beta < 0.0:
            raise ConfigError("beta must be non-negative")
        for pct_name in ("pct_harmonizer", "pct_spectral"):
            pct = getattr(self, pct_name)
            if not (0.0 < pct < 100.0):
                raise ConfigError(f"{pct_name} must be in (0, 100)")
        if not self.sizes or not self.seeds:
            raise ConfigError("sizes and seeds must be non-empty")
        if self.budget < 1 or self.batch < 1 or self.min_votes < 1 or self.max_targets < 1:
            raise ConfigError("budget, batch, min_votes, max_targets must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Load a config file (optional) and apply override key/value pairs."""
    data: dict = {}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file does not exist: {path}")
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if key not in known:
            raise ConfigError(f"unknown config key: {key}")
        if key == "provider" and isinstance(value, dict):
            merged.setdefault("provider", _default_provider())
            merged["provider"] = {**merged["provider"], **value}
        else:
            merged[key] = value
    try:
        config = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def build_provider(config: RunConfig) -> Provider:
    """Instantiate the configured provider, wrapped in the disk cache if set."""
    settings = config.provider
    kind = settings["type"]
    cache_dir = settings.get("cache_dir")
    if kind == "cache":
        if not cache_dir:
            raise ConfigError("cache provider needs provider.cache_dir")
        return CacheReplayProvider(cache_dir)
    if kind == "http":
        url = settings.get("url")
        if not url:
            raise ConfigError("http provider needs provider.url")
        inner: Provider = HttpProvider(
            url=url,
            token_env=settings.get("token_env", DEFAULT_TOKEN_ENV),
            request_template=settings.get("request_template", DEFAULT_REQUEST_TEMPLATE),
            response_path=settings.get("response_path", DEFAULT_RESPONSE_PATH),
            timeout=float(settings.get("timeout", 120.0)),
        )
    else:  # synthetic
        from .synthetic import SyntheticProvider, make_planted_model

        model = make_planted_model(
            n_genes=int(settings.get("n_genes", 100)),
            seed=int(settings.get("synthetic_seed", 0)),
        )
        inner = SyntheticProvider(
            model,
            p_true=float(settings.get("p_true", 0.8)),
            distractor_mean=float(settings.get("distractor_mean", 2.0)),
        )
    if cache_dir:
        return CachingProvider(inner, cache_dir)
    return inner


def model_id(config: RunConfig) -> str:
    return str(config.provider.get("model", "default"))
