"""Gaussian / Laplacian pyramids and normalised spatial-frequency band weights."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imgio import as_plane

BURT_ADELSON_KERNEL = np.array([0.05, 0.25, 0.4, 0.25, 0.05])
BAND_FREQUENCIES = (16.0, 8.0, 4.0, 2.0, 1.0, 0.5, 0.25)  # cpd at ~31 px/deg
N_BANDS = len(BAND_FREQUENCIES)
DEGENERATE_FRACTION = 1e-6


class PyramidKind(enum.Enum):
    GAUSSIAN = "Gaussian"
    LAPLACIAN = "Laplacian"


class PyramidError(ValueError):
    pass


@dataclass
class Pyramid:
    levels: list[np.ndarray]
    kind: PyramidKind = PyramidKind.GAUSSIAN
    base_ppd: float = 31.0

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    @property
    def base_shape(self) -> tuple[int, int]:
        return self.levels[0].shape


@dataclass
class BandWeights:
    R: np.ndarray  # (N_BANDS, H, W)
    peak_frequencies: tuple[float, ...] = field(default=BAND_FREQUENCIES)

    def __getitem__(self, i):
        return self.R[i]


def blur(plane: np.ndarray) -> np.ndarray:
    """Separable 5-tap Burt-Adelson filter with edge replication."""
    out = ndimage.correlate1d(plane, BURT_ADELSON_KERNEL, axis=0, mode="nearest")
    return ndimage.correlate1d(out, BURT_ADELSON_KERNEL, axis=1, mode="nearest")


def reduce_level(plane: np.ndarray) -> np.ndarray:
    """Blur then keep even rows/columns; odd sizes round up."""
    return blur(plane)[::2, ::2]


def gaussian_pyramid(channel, depth: int, ppd: float = 31.0, strict: bool = True) -> Pyramid:
    """Build ``depth`` levels, level 0 being the input.

    ``strict=False`` lets coarse levels bottom out at 1x1 on images smaller
    than ``2**(depth-1)``, which the saliency stage needs on small frames.
    """
    plane = as_plane(channel)
    if depth < 1:
        raise PyramidError("depth must be >= 1")
    if strict and min(plane.shape) < 2 ** (depth - 1):
        raise PyramidError(
            f"{plane.shape[1]}x{plane.shape[0]} image too small for a {depth}-level pyramid"
        )
    levels = [plane]
    for _ in range(depth - 1):
        levels.append(reduce_level(levels[-1]))
    return Pyramid(levels, PyramidKind.GAUSSIAN, ppd)


def _axis_weights(n_out: int, n_in: int, step: int):
    # Level pixel j sits on full-resolution pixel j*step.
    x = np.arange(n_out) / step
    x = np.clip(x, 0, n_in - 1)
    i0 = np.floor(x).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, x - i0


def upsample(level: np.ndarray, shape: tuple[int, int], level_index: int) -> np.ndarray:
    """Bilinear upsampling of pyramid level ``level_index`` to ``shape``."""
    if level_index == 0 and level.shape == tuple(shape):
        return level
    step = 2**level_index
    r0, r1, wr = _axis_weights(shape[0], level.shape[0], step)
    c0, c1, wc = _axis_weights(shape[1], level.shape[1], step)
    rows = level[r0] * (1.0 - wr)[:, None] + level[r1] * wr[:, None]
    return rows[:, c0] * (1.0 - wc)[None, :] + rows[:, c1] * wc[None, :]


def upsampled_levels(pyr: Pyramid) -> list[np.ndarray]:
    shape = pyr.base_shape
    return [upsample(lv, shape, i) for i, lv in enumerate(pyr.levels)]


def laplacian_bands(gauss: Pyramid) -> Pyramid:
    """Seven full-resolution band-pass levels |A(i) - A(i+1)|."""
    if gauss.kind is not PyramidKind.GAUSSIAN:
        raise PyramidError("laplacian_bands needs a Gaussian pyramid")
    if len(gauss) < N_BANDS + 1:
        raise PyramidError(f"need >= {N_BANDS + 1} Gaussian levels, got {len(gauss)}")
    up = upsampled_levels(Pyramid(gauss.levels[: N_BANDS + 1]))
    bands = [np.abs(up[i] - up[i + 1]) for i in range(N_BANDS)]
    return Pyramid(bands, PyramidKind.LAPLACIAN, gauss.base_ppd)


def band_weights(lap: Pyramid) -> BandWeights:
    if lap.kind is not PyramidKind.LAPLACIAN or len(lap) != N_BANDS:
        raise PyramidError(f"band_weights needs a {N_BANDS}-level Laplacian pyramid")
    L = np.stack(lap.levels)
    total = np.zeros(L.shape[1:])
    for band in L:  # fixed summation order
        total = total + band
    eps = DEGENERATE_FRACTION * float(total.max())
    degenerate = (total <= 0.0) | (total < eps)
    safe = np.where(degenerate, 1.0, total)
    R = L / safe
    R[:, degenerate] = 0.0
    R[N_BANDS - 1, degenerate] = 1.0
    return BandWeights(R)


def frequency_content(luminance, ppd: float = 31.0) -> BandWeights:
    """Band weights of a luminance plane, building the 8-level pyramid."""
    return band_weights(laplacian_bands(gaussian_pyramid(luminance, N_BANDS + 1, ppd)))
