"""Workbench configuration: a nested YAML document mapped onto dataclasses.

Every section is optional; missing keys fall back to the dataclass defaults.
``dump_config(load_config(text))`` reproduces the same document.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ValidationError
from .network import NetworkSpec
from .source import SourceParams, TagPolicy
from .spectral import SpectrumParams


@dataclass(frozen=True)
class SamplingConfig:
    hv_total: float = 144.0
    theta_total: float = 100.0
    seed: int | None = None

    def __post_init__(self):
        if self.hv_total <= 0 or self.theta_total <= 0:
            raise ValidationError("expected totals must be positive")


@dataclass(frozen=True)
class MeasurementConfig:
    """Rotated settings k*pi/N for k = 0..N-1 plus ``fringe_points`` evenly spaced angles."""
    fringe_points: int = 0


@dataclass(frozen=True)
class PathsConfig:
    fixtures: str | None = None
    reports: str | None = None


@dataclass(frozen=True)
class WorkbenchConfig:
    source: SourceParams = field(default_factory=SourceParams)
    network: NetworkSpec = field(default_factory=NetworkSpec)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)
    spectral: SpectrumParams = field(default_factory=SpectrumParams)


_SECTIONS = {f.name: f.default_factory for f in fields(WorkbenchConfig)}


def _build(cls, data, section):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ValidationError(f"section {section!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown keys in {section!r}: {sorted(unknown)}")
    data = {k: (math.inf if v == "inf" else v) for k, v in data.items()}
    try:
        return cls(**data)
    except TypeError as exc:
        raise ValidationError(f"section {section!r}: {exc}") from exc


def config_from_dict(data: dict | None) -> WorkbenchConfig:
    data = data or {}
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ValidationError(f"unknown config sections: {sorted(unknown)}")
    parts = {}
    for name, factory in _SECTIONS.items():
        parts[name] = _build(type(factory()), data.get(name), name)
    return WorkbenchConfig(**parts)


def _plain(v):
    if isinstance(v, TagPolicy):
        return v.value
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def config_to_dict(cfg: WorkbenchConfig) -> dict:
    return {name: {k: _plain(v) for k, v in asdict(getattr(cfg, name)).items()} for name in _SECTIONS}


def load_config(path) -> WorkbenchConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def parse_config(text: str) -> WorkbenchConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"config is not valid YAML: {exc}") from exc
    return config_from_dict(data)


class _Dumper(yaml.SafeDumper):
    pass


# sections stay in block style, short lists such as edges go inline
_Dumper.add_representer(list, lambda d, v: d.represent_sequence("tag:yaml.org,2002:seq", v, flow_style=True))


def dump_config(cfg: WorkbenchConfig) -> str:
    return yaml.dump(config_to_dict(cfg), Dumper=_Dumper, sort_keys=False, default_flow_style=False)
