"""Procedural test scenes and frames.

``box_scene``      diffuse, checker-textured room lit by a ceiling quad, with
                   one textured sphere sliding along x.
``single_light_scene``  a floor under one square light, for form-factor checks.
``synthetic_frames``    two procedurally textured frames with a moving bright
                   square, for the image-only pipeline.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .scene import Scene, parse_scene


def _quad(mat: str, a, b, c, d) -> list[str]:
    f = lambda p: " ".join(f"{v:.9g}" for v in p)  # noqa: E731
    return [f"tri {mat} {f(a)} {f(b)} {f(c)}", f"tri {mat} {f(a)} {f(c)} {f(d)}"]


def _translation(t) -> str:
    m = np.eye(4)
    m[:3, 3] = t
    return " ".join(f"{v:.9g}" for v in m.ravel())


def box_scene_text(
    frames: int = 2,
    sphere_step: float = 0.08,
    checker_size: float = 0.05,
    light_emission: float = 6.0,
    closed: bool = False,
) -> str:
    """Scene file text for the moving-sphere box (see module docstring)."""
    lines = [
        "# diffuse box, ceiling light, one moving sphere",
        f"mat wall 0.55 0.55 0.55 checker 0.25 0.25 0.25 {checker_size:g}",
        f"mat red 0.6 0.12 0.1 checker 0.3 0.06 0.05 {checker_size:g}",
        f"mat green 0.12 0.5 0.15 checker 0.06 0.25 0.07 {checker_size:g}",
        f"mat ball 0.8 0.75 0.2 checker 0.2 0.2 0.6 {checker_size * 1.5:g}",
        f"light lamp {light_emission:g} {light_emission:g} {light_emission:g}",
    ]
    z = 1.2 if closed else 1.0  # a closed box reaches past the camera
    lines += _quad("wall", (-1, -1, -1), (1, -1, -1), (1, -1, z), (-1, -1, z))  # floor
    lines += _quad("wall", (-1, 1, -1), (-1, 1, z), (1, 1, z), (1, 1, -1))  # ceiling
    lines += _quad("wall", (-1, -1, -1), (-1, 1, -1), (1, 1, -1), (1, -1, -1))  # back
    lines += _quad("red", (-1, -1, -1), (-1, -1, z), (-1, 1, z), (-1, 1, -1))  # left
    lines += _quad("green", (1, -1, -1), (1, 1, -1), (1, 1, z), (1, -1, z))  # right
    if closed:
        lines += _quad("wall", (-1, -1, z), (-1, 1, z), (1, 1, z), (1, -1, z))
    lines += _quad("lamp", (-0.3, 0.98, -0.3), (0.3, 0.98, -0.3), (0.3, 0.98, 0.3), (-0.3, 0.98, 0.3))
    n_static = 12 + (2 if closed else 0)
    lines.append("sphere ball -0.35 -0.65 -0.25 0.35")
    for f in range(frames):
        lines.append("camera %d 0 0 1.0  0 0 -1  0 1 0  50" % f)
        lines.append(f"xform {f} {n_static} {_translation((sphere_step * f, 0, 0))}")
    return "\n".join(lines) + "\n"


def box_scene(**kw) -> Scene:
    return parse_scene(box_scene_text(**kw))


# ---------------------------------------------------------------------------
# single square light over a floor

SINGLE_LIGHT = {"side": 0.6, "height": 1.0, "emission": 4.0, "albedo": 0.5}


def single_light_scene_text(side=SINGLE_LIGHT["side"], height=SINGLE_LIGHT["height"],
                            emission=SINGLE_LIGHT["emission"], albedo=SINGLE_LIGHT["albedo"]) -> str:
    h = side / 2.0
    lines = [f"mat floor {albedo:g} {albedo:g} {albedo:g}", f"light lamp {emission:g} {emission:g} {emission:g}"]
    lines += _quad("floor", (-3, 0, -3), (-3, 0, 3), (3, 0, 3), (3, 0, -3))
    lines += _quad("lamp", (-h, height, -h), (h, height, -h), (h, height, h), (-h, height, h))
    # camera below the light plane, aimed at the origin through the central pixel
    lines.append(f"camera 0 0 {0.5 * height:g} 1.5  0 0 0  0 1 0  30")
    return "\n".join(lines) + "\n"


def single_light_scene(**kw) -> Scene:
    return parse_scene(single_light_scene_text(**kw))


def corner_form_factor(a: float, b: float, h: float) -> float:
    """Point-to-rectangle form factor, point below one corner of an a x b patch at height h."""
    x, y = a / h, b / h
    sx, sy = math.sqrt(1 + x * x), math.sqrt(1 + y * y)
    return (x / sx * math.atan(y / sx) + y / sy * math.atan(x / sy)) / (2 * math.pi)


def centred_square_radiance(side, height, emission, albedo) -> float:
    """Outgoing radiance of a Lambertian point under the centre of a square emitter."""
    F = 4.0 * corner_form_factor(side / 2.0, side / 2.0, height)
    E = math.pi * emission * F
    return albedo / math.pi * E


# ---------------------------------------------------------------------------
# image-only fixture


def textured_plane(shape, seed: int, sigma: float = 1.5, contrast: float = 0.25, mean: float = 0.35):
    """Smooth random texture in [0, 1] (blurred white noise)."""
    rng = np.random.default_rng(seed)
    t = ndimage.gaussian_filter(rng.random(shape), sigma, mode="wrap")
    t = (t - t.mean()) / (t.std() + 1e-12)
    return np.clip(mean + contrast * t / 3.0, 0.0, 1.0)


def multiscale_noise(shape, seed: int, sigmas=(2.0, 4.0, 8.0), gamma: float = 0.5) -> np.ndarray:
    """Sum of blurred white-noise layers, layer ``s`` weighted by ``s**gamma``."""
    rng = np.random.default_rng(seed)
    out = np.zeros(shape)
    for s in sigmas:
        layer = ndimage.gaussian_filter(rng.standard_normal(shape), s, mode="wrap")
        out += s**gamma * layer / layer.std()
    return out


def synthetic_frames(size: int = 128, square: int = 16, step=(4, 0), seed: int = 7):
    """Two RGB frames: textured gray background, a bright square moved by ``step`` px.

    Returns ``(frame0, frame1, square_mask0)`` as float arrays.
    """
    bg = textured_plane((size, size), seed)
    frames, masks = [], []
    y0 = x0 = size // 2 - square // 2
    for k in range(2):
        img = np.repeat(bg[:, :, None], 3, axis=2)
        ys, xs = y0 + k * step[1], x0 + k * step[0]
        m = np.zeros((size, size), dtype=bool)
        m[ys : ys + square, xs : xs + square] = True
        img[m] = (0.95, 0.9, 0.6)
        frames.append(img)
        masks.append(m)
    return frames[0], frames[1], masks[0]
