"""End-to-end aleph computation from estimate frames."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import aleph as _aleph
from .imgio import ColorSpace, DisplayGeometry, ImageBuffer, luminance_of, rgb_to_opponent
from .motion import (
    DisplacementField,
    VelocityField,
    displacement_to_velocity,
    match_image_motion,
    project_model_motion,
)
from .pyramid import BandWeights, frequency_content
from .saliency import SaliencyMap, compute_saliency


@dataclass
class AlephResult:
    aleph: _aleph.AlephMap
    saliency: SaliencyMap
    velocity: VelocityField
    displacement: DisplacementField
    bands: BandWeights


def _opponent(frame) -> ImageBuffer:
    if not isinstance(frame, ImageBuffer):
        frame = ImageBuffer(frame)
    return rgb_to_opponent(frame) if frame.space is ColorSpace.LINEAR_RGB else frame


def aleph_from_frames(
    frame_n,
    frame_n1=None,
    displacement: DisplacementField | None = None,
    mode=_aleph.Compensation.SALIENCY,
    params: _aleph.CsfParams = _aleph.DEFAULT_PARAMS,
    geom: DisplayGeometry | None = None,
) -> AlephResult:
    """ℵ for ``frame_n``; motion is matched against ``frame_n1`` unless given."""
    geom = geom or DisplayGeometry()
    opp = _opponent(frame_n)
    if displacement is None:
        if frame_n1 is None:
            raise ValueError("need either the next frame or a displacement field")
        displacement = match_image_motion(opp, _opponent(frame_n1))
    if displacement.shape != opp.shape:
        raise ValueError(f"displacement {displacement.shape} does not match frame {opp.shape}")
    vel = displacement_to_velocity(displacement, geom)
    sal = compute_saliency(opp, vel)
    bands = frequency_content(luminance_of(opp), geom.pixels_per_degree)
    a = _aleph.compute_aleph(bands, vel.speed, sal.S, mode, params)
    return AlephResult(a, sal, vel, displacement, bands)


def estimate_frames(scene, frames, width: int, height: int, spp: int = 16, seed: int = 0):
    """Direct-only estimates, sampled with one shared pattern so they are noise free."""
    from .harness.render import trace_direct

    return [trace_direct(scene, f, width, height, spp, seed, correlated=True) for f in frames]


def aleph_for_scene(
    scene,
    frame: int,
    width: int,
    height: int,
    mode=_aleph.Compensation.SALIENCY,
    params: _aleph.CsfParams = _aleph.DEFAULT_PARAMS,
    geom: DisplayGeometry | None = None,
    spp: int = 16,
    seed: int = 0,
    estimate: ImageBuffer | None = None,
) -> AlephResult:
    """Estimate frame plus model-based motion, then ℵ."""
    est = estimate if estimate is not None else estimate_frames(scene, [frame], width, height, spp, seed)[0]
    disp = project_model_motion(scene, frame, width, height)
    return aleph_from_frames(est, displacement=disp, mode=mode, params=params, geom=geom)


def saliency_overlay(frame: ImageBuffer, sal: SaliencyMap) -> np.ndarray:
    """Frame multiplied by S, for visual inspection."""
    return np.asarray(frame.data) * sal.S[:, :, None]
