"""Pipeline configuration: a flat key=value file, overridable from the command line."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

from .aleph import Compensation, CsfMaxMode, CsfParams
from .imgio import DisplayGeometry


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    # display
    pixels_per_degree: float = 31.0
    frames_per_second: float = 30.0
    max_display_luminance: float = 100.0
    # motion / aleph
    motion: str = "model"  # image | model
    mode: str = "saliency"  # zero | full | saliency
    c0: float = 1.14
    c1: float = 0.67
    c2: float = 1.7
    v_min: float = 0.15
    v_max: float = 80.0
    tracking_efficiency: float = 0.82
    csf_max_mode: str = "peak"  # peak | literal
    # oracle
    alpha_acc: float = 0.1
    alpha_mode: str = "compress"  # compress | scale-add
    k: float = 100.0
    max_samples: int = 512
    floor: int = 16
    # renderer / estimates
    width: int = 128
    height: int = 128
    spp: int = 16
    irradiance_samples: int = 256
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.motion not in ("image", "model"):
            raise ConfigError(f"motion must be image or model, got {self.motion!r}")
        if self.alpha_mode not in ("compress", "scale-add"):
            raise ConfigError(f"alpha_mode must be compress or scale-add, got {self.alpha_mode!r}")
        try:
            Compensation(self.mode)
            CsfMaxMode(self.csf_max_mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        try:
            self.geometry
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("width", "height", "spp", "irradiance_samples", "floor", "max_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.floor > self.max_samples:
            raise ConfigError("floor must not exceed max_samples")
        if not 0 < self.alpha_acc <= 1:
            raise ConfigError("alpha_acc must lie in (0, 1]")

    @property
    def geometry(self) -> DisplayGeometry:
        return DisplayGeometry(self.pixels_per_degree, self.frames_per_second, self.max_display_luminance)

    @property
    def csf(self) -> CsfParams:
        return CsfParams(
            self.c0, self.c1, self.c2, self.v_min, self.v_max, self.tracking_efficiency, CsfMaxMode(self.csf_max_mode)
        )

    @property
    def compensation(self) -> Compensation:
        return Compensation(self.mode)

    def updated(self, **overrides) -> "PipelineConfig":
        """Copy with non-None overrides applied."""
        known = {f.name for f in fields(self)}
        for key in overrides:
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))


def _coerce(name: str, kind, raw: str):
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None
    return raw


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    base = base or PipelineConfig()
    types = {f.name: f.type for f in fields(PipelineConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, types[key], raw)
    return base.updated(**values)


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
