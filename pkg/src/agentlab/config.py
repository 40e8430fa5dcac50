"""Service configuration: store selection, protocol thresholds, observer
tokens, and provider backend wiring."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml


class ConfigError(Exception):
    pass


@dataclass
class ProviderSettings:
    backend: str = "stub"  # stub | http
    corpus_path: str | None = None  # stub literature: fixture corpus override
    data_root: str | None = None  # stub analysis: dataset root override
    extra_sources: list[str] = field(default_factory=list)
    base_url: str | None = None
    credential: str | None = None  # inline secret (tests / local setups)
    credential_env: str | None = None  # name of env var holding the secret

    def resolve_credential(self) -> str | None:
        if self.credential is not None:
            return self.credential
        if self.credential_env:
            return os.environ.get(self.credential_env)
        return None

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderSettings":
        settings = cls(
            backend=data.get("backend", "stub"),
            corpus_path=data.get("corpus_path"),
            data_root=data.get("data_root"),
            extra_sources=list(data.get("extra_sources", [])),
            base_url=data.get("base_url"),
            credential=data.get("credential"),
            credential_env=data.get("credential_env"),
        )
        if settings.backend not in ("stub", "http"):
            raise ConfigError(f"unknown provider backend: {settings.backend}")
        if settings.backend == "http" and not settings.base_url:
            raise ConfigError("http provider backend needs a base_url")
        return settings


@dataclass
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8732
    store_kind: str = "in_memory"  # in_memory | file_backed
    store_path: str | None = None
    claim_threshold: int = 3
    vote_window_seconds: int = 3600
    heartbeat_ttl_seconds: int = 300
    min_accepted_sources: int = 2
    observer_tokens: dict[str, str] = field(default_factory=dict)  # token -> name
    rng_seed: int | None = None
    job_execution: str = "pool"  # pool | manual
    job_pool_workers: int = 2
    literature: ProviderSettings = field(default_factory=ProviderSettings)
    analysis: ProviderSettings = field(default_factory=ProviderSettings)

    @classmethod
    def from_dict(cls, data: dict) -> "ServiceConfig":
        config = cls()
        store = data.get("store", {})
        if isinstance(store, str):
            store = {"kind": store}
        config.store_kind = store.get("kind", "in_memory")
        config.store_path = store.get("path")
        if config.store_kind not in ("in_memory", "file_backed"):
            raise ConfigError(f"unknown store kind: {config.store_kind}")
        if config.store_kind == "file_backed" and not config.store_path:
            raise ConfigError("file_backed store needs a path")
        address = data.get("listen_address")
        if address:
            host, _, port = str(address).rpartition(":")
            if not host or not port.isdigit():
                raise ConfigError(f"listen_address must be host:port, got {address!r}")
            config.listen_host, config.listen_port = host, int(port)
        config.listen_host = data.get("listen_host", config.listen_host)
        config.listen_port = int(data.get("listen_port", config.listen_port))
        config.claim_threshold = int(data.get("claim_threshold", config.claim_threshold))
        config.vote_window_seconds = int(
            data.get("vote_window_seconds", config.vote_window_seconds)
        )
        config.heartbeat_ttl_seconds = int(
            data.get("heartbeat_ttl_seconds", config.heartbeat_ttl_seconds)
        )
        config.min_accepted_sources = int(
            data.get("min_accepted_sources", config.min_accepted_sources)
        )
        observers = data.get("observer_tokens", [])
        if isinstance(observers, dict):
            config.observer_tokens = {str(t): str(n) for t, n in observers.items()}
        else:
            config.observer_tokens = {
                str(entry): f"observer-{index + 1}"
                for index, entry in enumerate(observers)
            }
        if "rng_seed" in data and data["rng_seed"] is not None:
            config.rng_seed = int(data["rng_seed"])
        config.job_execution = data.get("job_execution", config.job_execution)
        if config.job_execution not in ("pool", "manual"):
            raise ConfigError(f"unknown job execution mode: {config.job_execution}")
        config.job_pool_workers = int(data.get("job_pool_workers", config.job_pool_workers))
        providers = data.get("providers", {})
        config.literature = ProviderSettings.from_dict(providers.get("literature", {}))
        config.analysis = ProviderSettings.from_dict(providers.get("analysis", {}))
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config root must be a mapping: {path}")
        return cls.from_dict(data)
