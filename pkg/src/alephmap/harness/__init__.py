"""Minimal global-illumination renderer driven by perceptual maps."""
from __future__ import annotations

from .cache import IrradianceCache, IrradianceRecord, irradiance_lookup, irradiance_sample
from .render import RenderMode, RenderParams, RenderStats, render, trace_direct
from .scene import Camera, Material, Primitive, Scene, SceneError, dump_scene, load_scene, parse_scene, save_scene

__all__ = [
    "Camera",
    "IrradianceCache",
    "IrradianceRecord",
    "Material",
    "Primitive",
    "RenderMode",
    "RenderParams",
    "RenderStats",
    "Scene",
    "SceneError",
    "dump_scene",
    "irradiance_lookup",
    "irradiance_sample",
    "load_scene",
    "parse_scene",
    "render",
    "save_scene",
    "trace_direct",
]
