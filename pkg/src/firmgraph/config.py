"""Run configuration: config file, environment overrides, flag overrides.

Precedence, lowest to highest: config file values, the
``FIRMGRAPH_CVE_DB`` / ``FIRMGRAPH_EPSS`` / ``FIRMGRAPH_KEV`` environment
variables for the data-source paths, then explicit flags.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .engine import DEFAULT_DERIVATION_CAP
from .errors import ConfigError

ENV_CVE_DB = "FIRMGRAPH_CVE_DB"
ENV_EPSS = "FIRMGRAPH_EPSS"
ENV_KEV = "FIRMGRAPH_KEV"

DEFAULT_PATH_CAP = 10_000


@dataclass(frozen=True)
class RunConfig:
    cve_db: str | None = None
    epss: str | None = None
    kev: str | None = None
    ruleset: str = "combined"
    out_dir: str = "out"
    derivation_cap: int = DEFAULT_DERIVATION_CAP
    path_cap: int = DEFAULT_PATH_CAP
    include_empty: bool = True
    workers: int = 0  # 0 means "number of processors"

    def resolved_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)


_CONFIG_KEYS = {
    "cve_db",
    "epss",
    "kev",
    "ruleset",
    "out_dir",
    "derivation_cap",
    "path_cap",
    "include_empty",
    "workers",
}


def load_config(
    config_path: str | None = None,
    *,
    env: dict | None = None,
    **overrides,
) -> RunConfig:
    """Assemble a :class:`RunConfig` from file, environment, and flags."""
    env = os.environ if env is None else env
    values: dict = {}
    if config_path:
        try:
            raw = json.loads(Path(config_path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(
                f"unknown config keys: {', '.join(sorted(unknown))}"
            )
        values.update(raw)

    for env_name, key in ((ENV_CVE_DB, "cve_db"), (ENV_EPSS, "epss"), (ENV_KEV, "kev")):
        if env.get(env_name):
            values[key] = env[env_name]

    for key, value in overrides.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config option {key!r}")
        if value is not None:
            values[key] = value

    config = RunConfig(**values)
    if config.derivation_cap <= 0 or config.path_cap <= 0:
        raise ConfigError("caps must be positive")
    return config


def validate_inputs(config: RunConfig) -> RunConfig:
    """Check that configured data-source paths exist."""
    if not config.cve_db:
        raise ConfigError(
            "no CVE snapshot configured (use --cve-db, a config file, or "
            f"{ENV_CVE_DB})"
        )
    for label, path in (
        ("CVE snapshot", config.cve_db),
        ("EPSS snapshot", config.epss),
        ("KEV catalog", config.kev),
    ):
        if path and not Path(path).exists():
            raise ConfigError(f"{label} path does not exist: {path}")
    return config
