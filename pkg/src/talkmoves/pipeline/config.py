"""Service configuration: file (key=value or json), environment, flags.

Precedence: flags beat ``TALKMOVES_*`` environment variables, which beat the
config file, which beats defaults. Every key has an env var with the
``TALKMOVES_`` prefix (e.g. ``TALKMOVES_STORE``).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

ENV_PREFIX = "TALKMOVES_"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8077"
    store: str = "talkmoves-store"
    classifier: str = "rule"  # rule | trained | adapter
    model: str | None = None
    adapter: str | None = None
    parallelism: int = 1
    stopwords: str | None = None
    top_words: int = 50
    adapter_timeout_s: float = 10.0
    adapter_retries: int = 2

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.classifier not in ("rule", "trained", "adapter"):
            raise ValueError(f"classifier must be rule|trained|adapter, got {self.classifier!r}")
        if self.classifier == "trained" and not self.model:
            raise ValueError("classifier 'trained' requires a model path")
        if self.classifier == "adapter" and not self.adapter:
            raise ValueError("classifier 'adapter' requires an adapter endpoint")

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(ServiceConfig)}[name]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def _parse_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | None = None, overrides: dict | None = None) -> ServiceConfig:
    known = {f.name for f in fields(ServiceConfig)}
    values: dict = {}
    if path:
        for key, value in _parse_config_file(path).items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = _coerce(key, str(value)) if isinstance(value, str) else value
    for name in known:
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return ServiceConfig(**values)
