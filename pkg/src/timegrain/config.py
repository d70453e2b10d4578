"""Flat ``key = value`` tool configuration."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

SEED_ENV = "TIMEGRAIN_SEED"

# counts that may legitimately be zero
_NON_NEGATIVE = {"n_attentive", "n_contextual", "seed"}


@dataclass(frozen=True)
class ToolConfig:
    window_seconds: float = 30.0
    max_segments: int = 5
    max_duration: float = 120.0
    positions: int = 768
    n_queries: int = 104
    n_attentive: int = 22
    n_contextual: int = 4
    heads: int = 4
    d: int = 16
    seed: int = 0
    onset_collar: float = 0.2
    offset_tolerance_fraction: float = 0.2
    label_map_path: str = ""
    workers: int = 1

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in ("int", "float"):
                if f.name in _NON_NEGATIVE or f.name in ("onset_collar", "offset_tolerance_fraction"):
                    if value < 0:
                        raise ConfigError(f"field {f.name!r}: must be >= 0, got {value}")
                elif value <= 0:
                    raise ConfigError(f"field {f.name!r}: must be > 0, got {value}")
        if self.n_attentive + self.n_contextual > self.n_queries:
            raise ConfigError(
                f"n_attentive + n_contextual ({self.n_attentive + self.n_contextual}) "
                f"exceeds n_queries ({self.n_queries})"
            )

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {value!r}" if f.type == "float" else f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def replace(self, **changes) -> "ToolConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def loads(cls, text: str, source: str = "<config>") -> "ToolConfig":
        types = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = (part.strip() for part in line.partition("="))
            if key not in types:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            try:
                if types[key] == "int":
                    values[key] = int(value)
                elif types[key] == "float":
                    values[key] = float(value)
                else:
                    values[key] = value.strip("'\"")
            except ValueError:
                raise ConfigError(
                    f"{source}:{lineno}: field {key!r}: expected {types[key]}, got {value!r}"
                ) from None
        try:
            return cls(**values)
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None

    @classmethod
    def load(cls, path: str | Path | None = None, env=None) -> "ToolConfig":
        """Load ``path`` (defaults when None), then apply ``TIMEGRAIN_SEED``."""
        env = os.environ if env is None else env
        cfg = cls() if path is None else cls.loads(Path(path).read_text(encoding="utf-8"), str(path))
        seed = env.get(SEED_ENV)
        if seed not in (None, ""):
            try:
                cfg = cfg.replace(seed=int(seed))
            except ValueError:
                raise ConfigError(f"{SEED_ENV}: expected an integer, got {seed!r}") from None
        return cfg
