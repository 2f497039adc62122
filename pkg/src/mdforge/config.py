"""Pipeline configuration: defaults, config-file loading, flag overrides.

The config file is flat key = value TOML; every key can also be given as
a --key flag on the command line, and flags win over the file.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    k_default: int = 8
    c: int = 2
    similarity_threshold: float = 0.6
    threshold_is_distance: bool = False
    min_community_size: int = 2
    nli_cap: int = 5
    entail_direction: str = "supported"
    token_budget: int = 4096
    length_control_fraction: float = 0.5
    normal_mean: float = 7.0
    normal_std: float = 5.0
    k_clamp: tuple[int, int] = (1, 14)
    seed: int = 0
    provider: str = "stub"
    provider_url: str = ""
    workers: int = 1
    min_doc_tokens: int = 10
    html_noise_max: float = 0.1
    separator: str = "<doc-sep>"
    prefix_template: str = "<len-{label}> "
    stub_dim: int = 256

    def validate(self) -> "PipelineConfig":
        if not 0.0 < self.similarity_threshold < 1.0:
            raise ConfigError("similarity_threshold must be in (0, 1)")
        if self.c < 1:
            raise ConfigError("c must be >= 1")
        if self.k_default < 1:
            raise ConfigError("k_default must be >= 1")
        if self.min_community_size < 1:
            raise ConfigError("min_community_size must be >= 1")
        if self.nli_cap < 2:
            raise ConfigError("nli_cap must be >= 2")
        if self.entail_direction not in ("supported", "both"):
            raise ConfigError("entail_direction must be 'supported' or 'both'")
        if self.token_budget < 1:
            raise ConfigError("token_budget must be >= 1")
        if not 0.0 <= self.length_control_fraction <= 1.0:
            raise ConfigError("length_control_fraction must be in [0, 1]")
        lo, hi = self.k_clamp
        if lo < 1 or hi < lo:
            raise ConfigError("k_clamp must satisfy 1 <= low <= high")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in u64")
        if self.provider not in ("stub", "http"):
            raise ConfigError("provider must be 'stub' or 'http'")
        if self.provider == "http" and not self.provider_url:
            raise ConfigError("http provider requires provider_url")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.min_doc_tokens < 0:
            raise ConfigError("min_doc_tokens must be >= 0")
        if not 0.0 <= self.html_noise_max <= 1.0:
            raise ConfigError("html_noise_max must be in [0, 1]")
        if self.stub_dim < 1:
            raise ConfigError("stub_dim must be >= 1")
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _coerce(name: str, value: object) -> object:
    if name not in _FIELDS:
        raise ConfigError(f"unknown config key: {name}")
    default = _FIELDS[name].default
    if name == "k_clamp":
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or not all(isinstance(v, int) for v in value)
        ):
            raise ConfigError("k_clamp must be a pair of integers")
        return (value[0], value[1])
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string")
        return value
    raise ConfigError(f"unsupported config key: {name}")  # pragma: no cover


def load_config_file(path: str) -> dict:
    """Parse a flat TOML config file into validated key/value overrides."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid config file {path}: {exc}") from exc
    return {name: _coerce(name, value) for name, value in data.items()}


def build_config(file_overrides: dict | None, flag_overrides: dict | None) -> PipelineConfig:
    """Defaults, then config file, then flags; flags win."""
    merged: dict = {}
    for source in (file_overrides, flag_overrides):
        if source:
            for name, value in source.items():
                merged[name] = _coerce(name, value)
    return PipelineConfig(**merged).validate()
