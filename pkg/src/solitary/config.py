"""Run configuration: defaults, ``key=value`` files, environment, flags.

Later sources win: defaults < config file < ``SOLITARY_*`` environment
variables < command-line flags.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

ENV_PREFIX = "SOLITARY_"
FORMATS = ("json", "dot", "csv", "text")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    max_cosets: int = 100_000
    max_index: int = 4
    copies: int = 3
    radius: int = 6
    epsilon: str = "1/4"
    max_size: int = 50
    node_limit: int = 20_000_000
    seed: int = 0
    format: str = "json"

    def __post_init__(self):
        for name in ("max_cosets", "max_index", "copies", "max_size", "node_limit"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.radius < 0:
            raise ConfigError("radius must be non-negative")
        try:
            eps = Fraction(self.epsilon)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"epsilon {self.epsilon!r} is not a rational p/q") from None
        if eps <= 0:
            raise ConfigError("epsilon must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")

    @property
    def epsilon_value(self) -> Fraction:
        return Fraction(self.epsilon)

    def to_dict(self) -> dict:
        return asdict(self)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str):
    if key not in _TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    if _TYPES[key] in (int, "int"):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key} expects an integer, got {value!r}") from None
    return value.strip()


def read_config_file(path: str | Path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _coerce(key, value)
    return out


def from_environment(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for key in _TYPES:
        value = environ.get(ENV_PREFIX + key.upper())
        if value is not None:
            out[key] = _coerce(key, value)
    return out


def load(config_file: str | None = None, overrides: dict | None = None, environ=None) -> RunConfig:
    values: dict = {}
    if config_file:
        values.update(read_config_file(config_file))
    values.update(from_environment(environ))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return replace(RunConfig(), **values)
